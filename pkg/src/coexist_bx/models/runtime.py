"""Models for the multi-version runtime."""

from __future__ import annotations

import re
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .bx import DerivedBx
from .datalog import PredicateRef
from .relation import Delta, RelationField, format_relation

VERSION_RE = re.compile(r"^[A-Za-z0-9_-]+$")


class ViewRef(BaseModel):
    """``<version>.<view>`` as used in scripts."""

    model_config = ConfigDict(frozen=True)

    version: str
    view: str

    @field_validator("version")
    @classmethod
    def validate_version(cls, v: str) -> str:
        if not VERSION_RE.match(v):
            raise ValueError(f"invalid version id {v!r}")
        return v

    @classmethod
    def parse(cls, text: str) -> "ViewRef":
        version, sep, view = text.partition(".")
        if not sep or not view:
            raise ValueError(f"expected <version>.<view>, got {text!r}")
        PredicateRef(name=view)
        return cls(version=version, view=view)

    @property
    def predicate(self) -> PredicateRef:
        return PredicateRef(name=self.view)

    def __str__(self) -> str:
        return f"{self.version}.{self.view}"


class RegisteredView(BaseModel):
    """A view exposed by a schema version, backed by a derived BX."""

    model_config = ConfigDict(frozen=True)

    ref: ViewRef
    derived: DerivedBx
    origin: Optional[str] = Field(default=None, description="Spec file the view came from")

    @property
    def predicate(self) -> PredicateRef:
        return self.ref.predicate

    @property
    def aux(self) -> PredicateRef:
        return self.predicate.undef_aux()


class ViewSnapshot(BaseModel):
    """One view's contents before and after a propagation."""

    model_config = ConfigDict(frozen=True)

    ref: ViewRef
    before: RelationField
    after: RelationField

    @property
    def changed(self) -> bool:
        return self.before != self.after


class PropagationRecord(BaseModel):
    """What one view update did to the store."""

    model_config = ConfigDict(frozen=True)

    ref: ViewRef
    view_delta: Delta = Field(..., description="Normalized update on the view")
    source_delta: dict[str, Delta] = Field(default_factory=dict)
    aux_delta: dict[str, Delta] = Field(default_factory=dict)
    snapshots: tuple[ViewSnapshot, ...] = ()

    @property
    def is_noop(self) -> bool:
        return (
            self.view_delta.is_empty
            and all(d.is_empty for d in self.source_delta.values())
            and all(d.is_empty for d in self.aux_delta.values())
        )

    def changed_views(self) -> list[ViewRef]:
        return [s.ref for s in self.snapshots if s.changed]

    def render(self) -> str:
        lines = [f"update {self.ref}: {self.view_delta}"]
        for name, delta in sorted(self.source_delta.items()):
            lines.append(f"  source {name}: {delta}")
        for name, delta in sorted(self.aux_delta.items()):
            lines.append(f"  aux {name}: {delta}")
        for snap in self.snapshots:
            if snap.changed:
                lines.append(
                    f"  {snap.ref}: {format_relation(snap.before)} -> {format_relation(snap.after)}"
                )
        return "\n".join(lines)
