"""Services for derivation, verification, the multi-version runtime and SQL output."""

from .derivation_manager import DerivationManager
from .script_runner import ScriptRunner
from .sql_emitter import SqlEmitter
from .verification_manager import VerificationManager
from .version_registry import VersionRegistry

__all__ = [
    "DerivationManager",
    "ScriptRunner",
    "SqlEmitter",
    "VerificationManager",
    "VersionRegistry",
]
