"""Bounded verification: finite universes and law reports."""

from __future__ import annotations

import functools
import itertools
import random
from enum import Enum
from typing import Any, Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .relation import Relation, RelationField, Row, format_relation, sorted_rows


class VerificationMode(str, Enum):
    """How cases are drawn from the universe."""

    EXHAUSTIVE = "exhaustive"
    SAMPLED = "sampled"


class Law(str, Enum):
    """Property being checked."""

    GETPUT = "GetPut"
    PUTGET = "PutGet"
    TOTALITY = "Totality"
    RANGE_MEMBERSHIP = "RangeMembership"


class Outcome(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class Universe(BaseModel):
    """Finite domain over which relations are enumerated."""

    model_config = ConfigDict(frozen=True)

    constants: tuple[int, ...] = Field(..., description="Integer constants")
    key_constants: tuple[str, ...] = Field(
        default=(), description="String constants for the first column of wider relations"
    )
    max_size: int = Field(default=3, ge=1, description="Maximum tuples per relation")
    mode: VerificationMode = Field(default=VerificationMode.EXHAUSTIVE)
    sample_count: int = Field(default=1000, ge=1, description="Cases drawn in sampled mode")
    seed: int = Field(default=0, description="Seed for sampled mode")

    @field_validator("constants")
    @classmethod
    def validate_constants(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if not v:
            raise ValueError("universe needs at least one constant")
        return tuple(sorted(set(v)))

    @classmethod
    def from_range(cls, low: int, high: int, **kwargs: Any) -> "Universe":
        """Constants ``low..high`` inclusive."""
        return cls(constants=tuple(range(low, high + 1)), **kwargs)

    def tuples(self, arity: int) -> list[Row]:
        return _tuples(self, arity)

    def relations(self, arity: int) -> list[Relation]:
        """Every relation of ``arity`` with at most ``max_size`` tuples."""
        return _relations(self, arity)

    def select(self, total: int) -> Iterable[int]:
        """Case indices to check out of ``total`` enumerated cases."""
        if self.mode == VerificationMode.EXHAUSTIVE or self.sample_count >= total:
            return range(total)
        rng = random.Random(self.seed)
        return sorted(rng.sample(range(total), self.sample_count))

    def describe(self) -> str:
        text = f"constants {self.constants[0]}..{self.constants[-1]}, size <= {self.max_size}"
        if self.key_constants:
            text += f", keys {list(self.key_constants)}"
        if self.mode == VerificationMode.SAMPLED:
            text += f", sampled {self.sample_count} (seed {self.seed})"
        return text


@functools.lru_cache(maxsize=64)
def _tuples(universe: Universe, arity: int) -> list[Row]:
    columns: list[tuple[Any, ...]] = [universe.constants] * arity
    if universe.key_constants and arity > 1:
        columns[0] = universe.key_constants
    return list(itertools.product(*columns))


@functools.lru_cache(maxsize=64)
def _relations(universe: Universe, arity: int) -> list[Relation]:
    rows = _tuples(universe, arity)
    out: list[Relation] = []
    for size in range(0, min(universe.max_size, len(rows)) + 1):
        out.extend(frozenset(combo) for combo in itertools.combinations(rows, size))
    return out


class Counterexample(BaseModel):
    """A failing case, keyed by surface predicate names."""

    model_config = ConfigDict(frozen=True)

    source: dict[str, RelationField] = Field(default_factory=dict, description="Source instance")
    target: dict[str, RelationField] = Field(
        default_factory=dict, description="Requested view state"
    )
    observed: dict[str, RelationField] = Field(default_factory=dict)
    expected: dict[str, RelationField] = Field(default_factory=dict)

    @staticmethod
    def _render(mapping: dict[str, Relation]) -> str:
        return ", ".join(f"{name}={format_relation(rel)}" for name, rel in sorted(mapping.items()))

    def render(self) -> str:
        lines = [f"  source:   {self._render(self.source)}"]
        if self.target:
            lines.append(f"  target:   {self._render(self.target)}")
        lines.append(f"  observed: {self._render(self.observed)}")
        lines.append(f"  expected: {self._render(self.expected)}")
        return "\n".join(lines)

    def to_document(self) -> dict[str, Any]:
        def rows(mapping: dict[str, Relation]) -> dict[str, list[list[Any]]]:
            return {k: [list(r) for r in sorted_rows(v)] for k, v in sorted(mapping.items())}

        return {
            "source": rows(self.source),
            "target": rows(self.target),
            "observed": rows(self.observed),
            "expected": rows(self.expected),
        }


class VerificationReport(BaseModel):
    """Result of checking one law."""

    model_config = ConfigDict(frozen=True)

    law: Law
    outcome: Outcome
    cases: int = Field(default=0, ge=0, description="Cases checked")
    counterexample: Optional[Counterexample] = None
    notes: tuple[str, ...] = ()

    @model_validator(mode="after")
    def validate_counterexample(self) -> "VerificationReport":
        if self.outcome == Outcome.FAIL and self.counterexample is None:
            raise ValueError("a failing report needs a counterexample")
        return self

    @property
    def passed(self) -> bool:
        return self.outcome == Outcome.PASS

    def summary(self) -> str:
        return f"{self.law.value}: {self.outcome.value} ({self.cases} cases)"

    def render_text(self) -> str:
        lines = [self.summary()]
        if self.counterexample is not None:
            lines.append(self.counterexample.render())
        lines.extend(f"  note: {note}" for note in self.notes)
        return "\n".join(lines)

    def to_document(self) -> dict[str, Any]:
        return {
            "law": self.law.value,
            "outcome": self.outcome.value,
            "cases": self.cases,
            "counterexample": self.counterexample.to_document() if self.counterexample else None,
            "notes": list(self.notes),
        }
