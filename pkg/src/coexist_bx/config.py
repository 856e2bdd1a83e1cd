"""Configuration management for the co-existing schema toolkit."""

from pathlib import Path

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .models.sql import SqlDialect
from .models.verification import Universe, VerificationMode


class VerificationConfig(BaseModel):
    """Bounds for brute-force law checking."""

    min_constant: int = Field(
        default=0,
        description="Smallest integer constant in the universe"
    )
    max_constant: int = Field(
        default=10,
        description="Largest integer constant in the universe"
    )
    max_size: int = Field(
        default=3,
        ge=1,
        description="Maximum tuples per enumerated relation"
    )
    mode: VerificationMode = Field(
        default=VerificationMode.EXHAUSTIVE,
        description="Enumerate every case or a seeded sample"
    )
    sample_count: int = Field(
        default=1000,
        ge=1,
        description="Cases checked in sampled mode"
    )
    seed: int = Field(
        default=0,
        description="Random seed for sampled mode"
    )
    key_constants: list[str] = Field(
        default=[],
        description="String constants for the key column of wider relations"
    )
    joint_max_constant: int = Field(
        default=6,
        description="Largest constant when sources and auxiliaries are enumerated jointly"
    )
    joint_max_size: int = Field(
        default=2,
        ge=1,
        description="Maximum relation size for joint enumeration"
    )

    @model_validator(mode="after")
    def validate_range(self) -> "VerificationConfig":
        if self.max_constant < self.min_constant:
            raise ValueError(
                f"empty constant range {self.min_constant}..{self.max_constant}"
            )
        if self.joint_max_constant < self.min_constant:
            raise ValueError(
                f"empty joint constant range {self.min_constant}..{self.joint_max_constant}"
            )
        return self

    def universe(self) -> Universe:
        """Universe for checks over source instances alone."""
        return Universe.from_range(
            self.min_constant,
            self.max_constant,
            key_constants=tuple(self.key_constants),
            max_size=self.max_size,
            mode=self.mode,
            sample_count=self.sample_count,
            seed=self.seed,
        )

    def joint_universe(self) -> Universe:
        """Universe for checks over (source, auxiliary) instances."""
        return Universe.from_range(
            self.min_constant,
            self.joint_max_constant,
            key_constants=tuple(self.key_constants),
            max_size=self.joint_max_size,
            mode=self.mode,
            sample_count=self.sample_count,
            seed=self.seed,
        )


class OutputConfig(BaseModel):
    """Where generated artifacts are written."""

    derived_dir: str = Field(
        default="derived",
        description="Directory for derived .dl programs"
    )
    sql_dir: str = Field(
        default="sql",
        description="Directory for generated .sql files"
    )


class SqlConfig(BaseModel):
    """SQL rendering options."""

    dialect: SqlDialect = Field(
        default=SqlDialect.GENERIC,
        description="Identifier quoting style"
    )
    indent: str = Field(
        default="  ",
        description="Indentation unit inside trigger bodies"
    )


class CoexistConfig(BaseSettings):
    """Main configuration for coexist-bx."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="COEXIST_BX_",
        env_nested_delimiter="__",
        case_sensitive=False,
    )

    verification: VerificationConfig = Field(default_factory=VerificationConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    sql: SqlConfig = Field(default_factory=SqlConfig)

    debug: bool = Field(default=False, description="Enable debug mode")
    log_level: str = Field(default="INFO", description="Logging level")

    def derived_path(self, base: Path | None = None) -> Path:
        """Directory for derived programs, relative to ``base`` or the cwd."""
        return (base or Path.cwd()) / self.output.derived_dir

    def sql_path(self, base: Path | None = None) -> Path:
        """Directory for generated SQL, relative to ``base`` or the cwd."""
        return (base or Path.cwd()) / self.output.sql_dir


# Global configuration instance
config = CoexistConfig()
