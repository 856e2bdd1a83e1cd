"""Delta-relation algebra: applying, diffing, normalizing and splitting updates.

Each operation also has a Datalog rendering (``view_update_rules`` for
applying a view delta, ``undef_definition_rules`` for the split) so the
two can be checked against each other.
"""

from __future__ import annotations

import logging

from .errors import DeltaOverlapError
from .models.datalog import Atom, PredicateRef, Program, RelLiteral, Role, Rule, Variable, Declaration
from .models.relation import Delta, Relation, check_same_arity

logger = logging.getLogger(__name__)


def apply_delta(current: Relation, delta: Delta) -> Relation:
    """``(current \\ -R) ∪ +R``."""
    check_same_arity(current, delta.inserted, delta.deleted)
    return (current - delta.deleted) | delta.inserted


def diff(old: Relation, new: Relation) -> Delta:
    """The effective delta taking ``old`` to ``new``."""
    check_same_arity(old, new)
    return Delta(inserted=new - old, deleted=old - new)


def normalize_delta(base: Relation, delta: Delta) -> Delta:
    """Make ``delta`` effective w.r.t. ``base``.

    Inserts already present and deletes of absent tuples are dropped; a tuple
    on both sides is a contradiction.
    """
    check_same_arity(base, delta.inserted, delta.deleted)
    overlap = delta.inserted & delta.deleted
    if overlap:
        raise DeltaOverlapError(sorted(overlap, key=str))
    inserted = delta.inserted - base
    deleted = delta.deleted & base
    if inserted != delta.inserted or deleted != delta.deleted:
        logger.debug(
            "Normalized delta: dropped %d no-op inserts, %d no-op deletes",
            len(delta.inserted) - len(inserted),
            len(delta.deleted) - len(deleted),
        )
    return Delta(inserted=inserted, deleted=deleted)


def undef_split(view_delta: Delta, source_delta_union: Relation) -> Delta:
    """The part of a view update that no source delta accounts for.

    ``source_delta_union`` is ``+S ∪ -S`` at view arity; the result is
    ``(+V \\ ±S, -V \\ ±S)``.
    """
    check_same_arity(view_delta.inserted, view_delta.deleted, source_delta_union)
    return Delta(
        inserted=view_delta.inserted - source_delta_union,
        deleted=view_delta.deleted - source_delta_union,
    )


def tuple_variables(arity: int) -> tuple[Variable, ...]:
    """``X`` for unary relations, ``X1..Xn`` otherwise."""
    if arity == 1:
        return (Variable(name="X"),)
    return tuple(Variable(name=f"X{i}") for i in range(1, arity + 1))


def _rule(head: PredicateRef, *body: RelLiteral, arity: int) -> Rule:
    xs = tuple_variables(arity)
    return Rule(head=Atom(predicate=head, args=xs), body=tuple(
        RelLiteral(atom=Atom(predicate=lit.predicate, args=xs), negated=lit.negated) for lit in body
    ))


def _lit(predicate: PredicateRef, negated: bool = False) -> RelLiteral:
    return RelLiteral(atom=Atom(predicate=predicate, args=()), negated=negated)


def view_update_rules(view: PredicateRef, arity: int) -> Program:
    """``v :- v_cur, not -v.`` and ``v :- +v.``"""
    rules = (
        _rule(view, _lit(view.current()), _lit(view.deleted(), negated=True), arity=arity),
        _rule(view, _lit(view.inserted()), arity=arity),
    )
    declarations = (
        Declaration(predicate=view.current(), arity=arity, role=Role.DERIVED),
        Declaration(predicate=view.inserted(), arity=arity, role=Role.VIEW),
        Declaration(predicate=view.deleted(), arity=arity, role=Role.VIEW),
    )
    return Program(declarations=declarations, rules=rules)


def undef_definition_rules(view: PredicateRef, source: PredicateRef, arity: int) -> Program:
    """``pm_s`` from ``+s``/``-s`` and the delta-based ``+v_ud``/``-v_ud`` rules."""
    pm = source.plusminus()
    aux = view.undef_aux()
    rules = (
        _rule(pm, _lit(source.inserted()), arity=arity),
        _rule(pm, _lit(source.deleted()), arity=arity),
        _rule(aux.inserted(), _lit(view.inserted()), _lit(pm, negated=True), arity=arity),
        _rule(aux.deleted(), _lit(view.deleted()), _lit(pm, negated=True), arity=arity),
    )
    return Program(rules=rules)


def plusminus_program(source: PredicateRef, view: PredicateRef, arity: int) -> Program:
    """Rules for applying a view delta together with the literal undef split."""
    return view_update_rules(view, arity).merge(undef_definition_rules(view, source, arity))
