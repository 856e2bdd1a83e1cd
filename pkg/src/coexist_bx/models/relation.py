"""Finite relational data: rows, relations, instances and deltas."""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr

from ..errors import ArityMismatchError
from .datalog import PredicateRef

Value = Union[int, str]
Row = tuple[Value, ...]
Relation = frozenset[Row]
Instance = Mapping[PredicateRef, Relation]

EMPTY: Relation = frozenset()

# Relation as a pydantic field type
RelationField = frozenset[tuple[Union[StrictInt, StrictStr], ...]]


def relation(*rows: Iterable[Value]) -> Relation:
    """Build a relation from row iterables: ``relation((5,), (9,))``."""
    return frozenset(tuple(r) for r in rows)


def relation_arity(rel: Relation) -> Optional[int]:
    """Common arity of ``rel``; ``None`` when empty."""
    arities = {len(row) for row in rel}
    if len(arities) > 1:
        raise ArityMismatchError(f"relation mixes arities {sorted(arities)}")
    return next(iter(arities), None)


def check_same_arity(*relations: Relation) -> Optional[int]:
    """Raise ``ArityMismatchError`` unless all non-empty relations agree."""
    found: Optional[int] = None
    for rel in relations:
        arity = relation_arity(rel)
        if arity is None:
            continue
        if found is not None and arity != found:
            raise ArityMismatchError(f"arity {arity} does not match arity {found}")
        found = arity
    return found


def row_sort_key(row: Row) -> tuple[tuple[bool, Value], ...]:
    """Integers before strings, then natural order."""
    return tuple((isinstance(v, str), v) for v in row)


def sorted_rows(rel: Iterable[Row]) -> list[Row]:
    return sorted(rel, key=row_sort_key)


def format_value(value: Value) -> str:
    return json.dumps(value) if isinstance(value, str) else str(value)


def format_row(row: Row) -> str:
    return "(" + ", ".join(format_value(v) for v in row) + ")"


def format_relation(rel: Relation) -> str:
    return "{" + ", ".join(format_row(r) for r in sorted_rows(rel)) + "}"


class Delta(BaseModel):
    """Inserted and deleted tuples of one relation."""

    model_config = ConfigDict(frozen=True)

    inserted: RelationField = Field(
        default_factory=frozenset, description="Tuples to insert (+R)"
    )
    deleted: RelationField = Field(
        default_factory=frozenset, description="Tuples to delete (-R)"
    )

    @classmethod
    def of(cls, inserted: Iterable[Row] = (), deleted: Iterable[Row] = ()) -> "Delta":
        return cls(inserted=frozenset(inserted), deleted=frozenset(deleted))

    @property
    def is_empty(self) -> bool:
        return not self.inserted and not self.deleted

    @property
    def is_disjoint(self) -> bool:
        return not (self.inserted & self.deleted)

    @property
    def touched(self) -> Relation:
        """``+R ∪ -R``."""
        return self.inserted | self.deleted

    def __str__(self) -> str:
        return f"(+{format_relation(self.inserted)}, -{format_relation(self.deleted)})"


def instance_from(mapping: Mapping[str, Iterable[Iterable[Value]]]) -> dict[PredicateRef, Relation]:
    """Build an instance keyed by surface predicate names."""
    return {PredicateRef.parse(name): relation(*rows) for name, rows in mapping.items()}
