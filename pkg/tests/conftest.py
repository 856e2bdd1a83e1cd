"""Test configuration and fixtures for coexist-bx."""

import tempfile
from pathlib import Path
from typing import Generator

import pytest

from coexist_bx.config import CoexistConfig, VerificationConfig
from coexist_bx.managers import (
    DerivationManager,
    ScriptRunner,
    SqlEmitter,
    VerificationManager,
    VersionRegistry,
)
from coexist_bx.models.bx import BxSpec, DerivedBx
from coexist_bx.models.verification import Universe

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    """Directory holding specs, scripts and golden files."""
    return DATA_DIR


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary output directory for testing."""
    with tempfile.TemporaryDirectory() as temp:
        yield Path(temp)


@pytest.fixture
def test_config(temp_dir: Path) -> CoexistConfig:
    """Configuration with small verification bounds and temporary output dirs."""
    config = CoexistConfig()
    config.verification = VerificationConfig(
        min_constant=0,
        max_constant=6,
        max_size=2,
        joint_max_constant=6,
        joint_max_size=2,
    )
    config.output.derived_dir = str(temp_dir / "derived")
    config.output.sql_dir = str(temp_dir / "sql")
    return config


@pytest.fixture
def small_universe() -> Universe:
    """Constants 0..6, relations of at most two tuples."""
    return Universe.from_range(0, 6, max_size=2)


@pytest.fixture
def verifier(test_config: CoexistConfig) -> VerificationManager:
    return VerificationManager(test_config)


@pytest.fixture
def deriver(test_config: CoexistConfig, verifier: VerificationManager) -> DerivationManager:
    return DerivationManager(test_config, verifier)


@pytest.fixture
def emitter(test_config: CoexistConfig) -> SqlEmitter:
    return SqlEmitter(test_config)


@pytest.fixture
def registry(test_config: CoexistConfig) -> VersionRegistry:
    return VersionRegistry(test_config)


@pytest.fixture
def runner(test_config: CoexistConfig, registry: VersionRegistry, deriver: DerivationManager) -> ScriptRunner:
    return ScriptRunner(test_config, registry=registry, deriver=deriver)


@pytest.fixture
def selection_spec(deriver: DerivationManager) -> BxSpec:
    """One view v1 over s, guarded by 4 < X."""
    return deriver.load_spec(DATA_DIR / "selection.dl")


@pytest.fixture
def identity_spec(deriver: DerivationManager) -> BxSpec:
    return deriver.load_spec(DATA_DIR / "identity.dl")


@pytest.fixture
def two_views_spec(deriver: DerivationManager) -> BxSpec:
    """Views v1 (4 < X) and v2 (7 < X) over the same source."""
    return deriver.load_spec(DATA_DIR / "two_views.dl")


@pytest.fixture
def selection_derived(deriver: DerivationManager, selection_spec: BxSpec) -> DerivedBx:
    return deriver.derive_all(selection_spec, verify=False)


@pytest.fixture
def identity_derived(deriver: DerivationManager, identity_spec: BxSpec) -> DerivedBx:
    return deriver.derive_all(identity_spec, verify=False)
