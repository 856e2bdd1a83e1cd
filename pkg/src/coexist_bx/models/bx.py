"""Models for a user-written BX spec and its derived programs."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from ..errors import FragmentError
from .datalog import Comparison, Declaration, PredicateRef, Program, Role, Variable


class BxSpec(BaseModel):
    """Source schema, view schema and the putdelta program."""

    model_config = ConfigDict(frozen=True)

    sources: tuple[Declaration, ...] = Field(..., description="Declarations with role source")
    views: tuple[Declaration, ...] = Field(..., description="Declarations with role view")
    putdelta: Program = Field(..., description="Rules with +s/-s heads")

    @classmethod
    def from_program(cls, program: Program) -> "BxSpec":
        """Split a parsed spec file into schema and putdelta rules."""
        sources = tuple(program.declared(Role.SOURCE))
        views = tuple(program.declared(Role.VIEW))
        source_preds = {d.predicate for d in sources}
        for rule in program.rules:
            head = rule.head.predicate
            if not head.is_delta or head.relation not in source_preds:
                raise FragmentError(
                    f"putdelta head {head} is not a delta of a declared source in: {rule}"
                )
        return cls(sources=sources, views=views, putdelta=program)

    @property
    def declarations(self) -> tuple[Declaration, ...]:
        return self.sources + self.views

    def declaration(self, predicate: PredicateRef) -> Optional[Declaration]:
        return next((d for d in self.declarations if d.predicate == predicate), None)

    @property
    def view_predicates(self) -> list[PredicateRef]:
        return [d.predicate for d in self.views]

    @property
    def source_predicates(self) -> list[PredicateRef]:
        return [d.predicate for d in self.sources]


class ViewGuard(BaseModel):
    """The selection condition linking one view to its source."""

    model_config = ConfigDict(frozen=True)

    view: PredicateRef
    source: PredicateRef
    variables: tuple[Variable, ...] = Field(..., description="Shared tuple variables")
    comparisons: tuple[Comparison, ...] = Field(default=(), description="Conjunction C; empty means true")

    @property
    def is_trivial(self) -> bool:
        return not self.comparisons


class DerivedBx(BaseModel):
    """Output of the four-step derivation."""

    model_config = ConfigDict(frozen=True)

    spec: BxSpec
    get: Program
    putdelta_prime: Program
    undef: Program
    get_prime: Program
    aux: tuple[Declaration, ...] = Field(..., description="One v_ud per view, same arity")
    guards: tuple[ViewGuard, ...] = ()

    @property
    def putdelta(self) -> Program:
        return self.spec.putdelta

    @property
    def views(self) -> list[PredicateRef]:
        return self.spec.view_predicates

    @property
    def total_put(self) -> Program:
        """putdelta and undef together: the total backward transformation."""
        return self.putdelta.merge(self.undef)

    @property
    def physical(self) -> tuple[Declaration, ...]:
        """Source relations plus auxiliary relations."""
        return self.spec.sources + self.aux

    def guard_for(self, view: PredicateRef) -> ViewGuard:
        for guard in self.guards:
            if guard.view == view:
                return guard
        raise KeyError(str(view))

    def view_sources(self) -> dict[PredicateRef, PredicateRef]:
        return {g.view: g.source for g in self.guards}

    def get_prime_for(self, view: PredicateRef) -> Program:
        """get' restricted to one view."""
        return self.get_prime.restrict_to({view}).pruned()

    def undef_for(self, view: PredicateRef) -> Program:
        aux = view.undef_aux()
        return self.undef.restrict_to({aux.inserted(), aux.deleted()}).pruned()

    def putdelta_for(self, view: PredicateRef) -> Program:
        """putdelta rules that read ``view``."""
        rules = [r for r in self.putdelta.rules if view in r.body_predicates()]
        return self.putdelta.with_rules(rules).pruned()
