"""SQL artifacts rendered from a derived BX."""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class SqlDialect(str, Enum):
    """Dialect variants; they differ only in identifier quoting."""

    GENERIC = "generic"
    ANSI = "ansi"

    def quote(self, identifier: str) -> str:
        if self == SqlDialect.ANSI:
            return '"' + identifier.replace('"', '""') + '"'
        return identifier


class ViewSql(BaseModel):
    """View definition and instead-of triggers for one view."""

    model_config = ConfigDict(frozen=True)

    view: str = Field(..., description="View name")
    view_statement: str = Field(..., description="CREATE VIEW statement")
    trigger_statements: tuple[str, ...] = Field(
        default=(), description="INSTEAD OF INSERT / DELETE triggers"
    )
    ddl_template: str = Field(default="", description="Commented DDL for the auxiliary table")

    @property
    def view_file_name(self) -> str:
        return f"{self.view}.view.sql"

    @property
    def triggers_file_name(self) -> str:
        return f"{self.view}.triggers.sql"

    def view_text(self) -> str:
        return self.view_statement + "\n"

    def triggers_text(self) -> str:
        parts = [self.ddl_template] if self.ddl_template else []
        parts.extend(self.trigger_statements)
        return "\n\n".join(parts) + "\n"


class SqlArtifact(BaseModel):
    """All SQL for a derived BX, in view declaration order."""

    model_config = ConfigDict(frozen=True)

    dialect: SqlDialect = SqlDialect.GENERIC
    views: tuple[ViewSql, ...] = ()

    @property
    def view_statements(self) -> list[str]:
        return [v.view_statement for v in self.views]

    @property
    def trigger_statements(self) -> list[str]:
        return [t for v in self.views for t in v.trigger_statements]

    def files(self) -> dict[str, str]:
        """File name to UTF-8 text, two files per view."""
        out: dict[str, str] = {}
        for view in self.views:
            out[view.view_file_name] = view.view_text()
            out[view.triggers_file_name] = view.triggers_text()
        return out
