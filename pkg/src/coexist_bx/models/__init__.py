"""Pydantic models for programs, relations, derivations and reports."""

from .bx import BxSpec, DerivedBx, ViewGuard
from .datalog import Declaration, PredicateRef, Program, Rule
from .relation import Delta, Instance, Relation
from .runtime import PropagationRecord, ViewRef
from .sql import SqlArtifact, SqlDialect
from .verification import Counterexample, Law, Outcome, Universe, VerificationMode, VerificationReport

__all__ = [
    "BxSpec",
    "Counterexample",
    "Declaration",
    "DerivedBx",
    "Delta",
    "Instance",
    "Law",
    "Outcome",
    "PredicateRef",
    "Program",
    "PropagationRecord",
    "Relation",
    "Rule",
    "SqlArtifact",
    "SqlDialect",
    "Universe",
    "VerificationMode",
    "VerificationReport",
    "ViewGuard",
    "ViewRef",
]
