"""Exception hierarchy for the co-existing schema toolkit.

Everything derives from ``ValueError`` so callers that only care about
"bad input" can keep catching that.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Optional, Sequence

if TYPE_CHECKING:
    from .models.verification import VerificationReport


class CoexistError(ValueError):
    """Base class for all domain errors."""


# Datalog -------------------------------------------------------------------


class DatalogError(CoexistError):
    """Problem with a Datalog program or its evaluation."""


class DatalogSyntaxError(DatalogError):
    """Rule text could not be parsed."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SafetyError(DatalogError):
    """A variable is not bound by a positive relational literal."""

    def __init__(self, rule: str, variable: str):
        super().__init__(f"unsafe variable {variable} in rule: {rule}")
        self.rule = rule
        self.variable = variable


class ArityError(DatalogError):
    """A predicate is used or declared with two different arities."""

    def __init__(self, predicate: str, expected: int, found: int):
        super().__init__(
            f"arity clash for {predicate}: declared/used with {expected}, found {found}"
        )
        self.predicate = predicate
        self.expected = expected
        self.found = found


class StratificationError(DatalogError):
    """The predicate dependency graph has a cycle."""

    def __init__(self, cycle: Sequence[str]):
        super().__init__(f"recursion is not supported: {' -> '.join(cycle)}")
        self.cycle = list(cycle)


class MissingRelationError(DatalogError):
    """An input relation the program reads was not supplied."""

    def __init__(self, predicate: str):
        super().__init__(f"missing input relation {predicate}")
        self.predicate = predicate


class EvaluationTypeError(DatalogError):
    """A comparison was evaluated over a non-integer value."""


class UnfoldError(DatalogError):
    """A literal cannot be unfolded by the given definitions."""


# Deltas --------------------------------------------------------------------


class DeltaError(CoexistError):
    """Problem with a delta relation."""


class ArityMismatchError(DeltaError):
    """Relations of different arity were combined."""


class DeltaOverlapError(DeltaError):
    """A tuple is both inserted and deleted."""

    def __init__(self, rows: Sequence[tuple[Any, ...]]):
        super().__init__(f"tuples both inserted and deleted: {sorted(map(str, rows))}")
        self.rows = list(rows)


# Derivation ----------------------------------------------------------------


class DerivationError(CoexistError):
    """A pipeline step failed; ``step`` is 1..4."""

    kind = "derivation failure"

    def __init__(self, message: str, step: int):
        super().__init__(f"{self.kind}: step {step}: {message}")
        self.step = step
        self.detail = message


class FragmentError(DerivationError):
    """The putdelta program is outside the supported selection fragment."""

    kind = "fragment violation"

    def __init__(self, message: str, step: int = 1):
        super().__init__(message, step)


class GuardExtractionError(DerivationError):
    """No guard could be read for a view."""

    kind = "guard extraction failure"


class DerivationVerificationError(DerivationError):
    """A candidate program failed bounded verification."""

    kind = "verification failure"

    def __init__(self, report: "VerificationReport", step: int):
        super().__init__(report.summary(), step)
        self.report = report


# Runtime -------------------------------------------------------------------


class RegistryError(CoexistError):
    """Problem with the multi-version store."""


class DuplicateVersionError(RegistryError):
    pass


class UnknownVersionError(RegistryError):
    pass


class UnknownViewError(RegistryError):
    pass


class AuxOwnershipError(RegistryError):
    """Two views would write the same auxiliary relation."""


class PropagationFault(RegistryError):
    """An update did not reproduce the requested view state; store rolled back."""

    def __init__(self, message: str, record: Optional[Any] = None):
        super().__init__(message)
        self.record = record


class ScriptSyntaxError(CoexistError):
    """A simulation script line could not be parsed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# SQL -----------------------------------------------------------------------


class UnsupportedConstructError(CoexistError):
    """A rule cannot be rendered as SQL."""

    def __init__(self, message: str, rule: str):
        super().__init__(f"{message}: {rule}")
        self.rule = rule
