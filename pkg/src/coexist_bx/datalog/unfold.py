"""Rule unfolding: substitute defined predicates by their defining bodies."""

from __future__ import annotations

import itertools
import logging
from typing import Optional

from ..errors import DatalogError, UnfoldError
from ..models.datalog import (
    Atom,
    Comparison,
    Literal,
    PredicateRef,
    Program,
    RelLiteral,
    Rule,
    Term,
    Variable,
    dedupe_rules,
)
from .stratify import stratify
from .wellformed import unsafe_variable

logger = logging.getLogger(__name__)

Substitution = dict[Variable, Term]


def _walk(term: Term, subst: Substitution) -> Term:
    while isinstance(term, Variable) and term in subst:
        term = subst[term]
    return term


def unify_args(definition: tuple[Term, ...], call: tuple[Term, ...]) -> Optional[Substitution]:
    """Most general unifier of a definition head with a call site.

    Definition variables are bound to call terms where possible so the
    caller's variable names survive.
    """
    if len(definition) != len(call):
        return None
    subst: Substitution = {}
    for d, c in zip(definition, call):
        d, c = _walk(d, subst), _walk(c, subst)
        if d == c:
            continue
        if isinstance(d, Variable):
            subst[d] = c
        elif isinstance(c, Variable):
            subst[c] = d
        else:
            return None
    return subst


def _apply_term(term: Term, subst: Substitution) -> Term:
    return _walk(term, subst)


def _apply_atom(atom: Atom, subst: Substitution) -> Atom:
    return Atom(predicate=atom.predicate, args=tuple(_apply_term(t, subst) for t in atom.args))


def _apply_literal(lit: Literal, subst: Substitution) -> Literal:
    if isinstance(lit, RelLiteral):
        return RelLiteral(atom=_apply_atom(lit.atom, subst), negated=lit.negated)
    return Comparison(
        left=_apply_term(lit.left, subst),
        op=lit.op,
        right=_apply_term(lit.right, subst),
        negated=lit.negated,
    )


def _apply_rule(head: Atom, body: list[Literal], subst: Substitution) -> Rule:
    return Rule(
        head=_apply_atom(head, subst),
        body=tuple(_apply_literal(lit, subst) for lit in body),
    )


class _Renamer:
    """Hands out variable names unused by the rule being rewritten."""

    def __init__(self) -> None:
        self.counter = 0

    def rename_apart(self, definition: Rule, taken: set[Variable]) -> Rule:
        mapping: Substitution = {}
        for v in sorted(definition.variables(), key=lambda v: v.name):
            self.counter += 1
            fresh = Variable(name=f"{v.name}_{self.counter}")
            while fresh in taken:
                self.counter += 1
                fresh = Variable(name=f"{v.name}_{self.counter}")
            mapping[v] = fresh
        return _apply_rule(definition.head, list(definition.body), mapping)


def _unfold_positive(
    rule: Rule, index: int, definitions: list[Rule], renamer: _Renamer
) -> list[Rule]:
    literal = rule.body[index]
    assert isinstance(literal, RelLiteral)
    out = []
    for definition in definitions:
        renamed = renamer.rename_apart(definition, rule.variables())
        subst = unify_args(renamed.head.args, literal.atom.args)
        if subst is None:
            continue
        body = [*rule.body[:index], *renamed.body, *rule.body[index + 1:]]
        out.append(_apply_rule(rule.head, body, subst))
    return out


def _unfold_negated(
    rule: Rule, index: int, definitions: list[Rule], renamer: _Renamer
) -> list[Rule]:
    """``not p(args)`` with ``p :- B1 | ... | Bn`` becomes the DNF of
    ``(not B1) and ... and (not Bn)``, one rule per choice of negated literal.
    """
    literal = rule.body[index]
    assert isinstance(literal, RelLiteral)
    call_vars = set(literal.atom.variables())
    alternatives: list[list[Literal]] = []
    for definition in definitions:
        renamed = renamer.rename_apart(definition, rule.variables())
        subst = unify_args(renamed.head.args, literal.atom.args)
        if subst is None:
            continue
        if any(v in subst for v in call_vars):
            raise UnfoldError(
                f"cannot negate {definition}: its head constrains the call {literal.atom}"
            )
        body = [_apply_literal(lit, subst) for lit in renamed.body]
        head_vars = set(_apply_atom(renamed.head, subst).variables())
        for lit in body:
            local = set(lit.variables()) - head_vars
            if local:
                raise UnfoldError(
                    f"cannot negate {definition}: body variable "
                    f"{sorted(v.name for v in local)[0]} does not occur in the head"
                )
        alternatives.append([lit.negate() for lit in body])

    before, after = rule.body[:index], rule.body[index + 1:]
    return [
        Rule(head=rule.head, body=(*before, *choice, *after))
        for choice in itertools.product(*alternatives)
    ]


def unfold(program: Program, definitions: Program) -> Program:
    """Replace every body literal over a predicate ``definitions`` defines.

    Positive occurrences yield one rule per defining rule (cross product when a
    predicate occurs several times). Negated occurrences are distributed into
    disjunctive normal form; this needs every defining body to use only head
    variables, otherwise ``UnfoldError``. Structural duplicates are dropped.
    """
    try:
        stratify(definitions)
    except DatalogError as e:
        raise UnfoldError(f"definitions must be non-recursive: {e}")

    defined = set(definitions.defined_predicates())
    by_predicate = {p: definitions.rules_for(p) for p in defined}
    renamer = _Renamer()

    pending = list(program.rules)
    finished: list[Rule] = []
    while pending:
        rule = pending.pop(0)
        index = next(
            (
                i
                for i, lit in enumerate(rule.body)
                if isinstance(lit, RelLiteral) and lit.predicate in defined
            ),
            None,
        )
        if index is None:
            finished.append(rule)
            continue
        literal = rule.body[index]
        assert isinstance(literal, RelLiteral)
        step = _unfold_negated if literal.negated else _unfold_positive
        pending[:0] = step(rule, index, by_predicate[literal.predicate], renamer)

    for rule in finished:
        variable = unsafe_variable(rule)
        if variable is not None:
            raise UnfoldError(f"unfolding left {variable} unbound in {rule}")

    used: set[PredicateRef] = set()
    for rule in finished:
        used.add(rule.head.predicate)
        used.update(rule.body_predicates())
    declarations = [d for d in program.declarations if d.predicate not in defined]
    for decl in definitions.declarations:
        if decl.predicate in used and all(d.predicate != decl.predicate for d in declarations):
            declarations.append(decl)

    result = Program(declarations=tuple(declarations), rules=dedupe_rules(finished))
    logger.debug("Unfolded %d rules into %d", len(program.rules), len(result.rules))
    return result
