"""Naive reference evaluator.

Enumerates every assignment of rule variables over the active domain and
checks each body literal directly. Slow, but independent of the join plans in
``evaluator``; the test-suite uses it as the oracle.
"""

from __future__ import annotations

import itertools
from typing import Iterable

from ..errors import EvaluationTypeError, MissingRelationError
from ..models.datalog import Comparison, Constant, PredicateRef, Program, RelLiteral, Role, Rule, Term, Variable
from ..models.relation import Instance, Relation, Row, Value
from .evaluator import _OPS
from .stratify import stratify


def _value(term: Term, assignment: dict[str, Value]) -> Value:
    if isinstance(term, Variable):
        return assignment[term.name]
    return term.value


def _holds(rule: Rule, assignment: dict[str, Value], current: dict[PredicateRef, Relation]) -> bool:
    # positive literals first so comparisons only see values the body can bind
    ordered = sorted(rule.body, key=lambda lit: not (isinstance(lit, RelLiteral) and not lit.negated))
    for lit in ordered:
        if isinstance(lit, Comparison):
            lhs, rhs = _value(lit.left, assignment), _value(lit.right, assignment)
            if type(lhs) is not int or type(rhs) is not int:
                raise EvaluationTypeError(f"comparison {lit} over non-integer values")
            if _OPS[lit.op](lhs, rhs) == lit.negated:
                return False
        else:
            row = tuple(_value(t, assignment) for t in lit.atom.args)
            if (row in current[lit.predicate]) == lit.negated:
                return False
    return True


def _active_domain(program: Program, instance: Instance) -> list[Value]:
    domain: set[Value] = set()
    for rel in instance.values():
        for row in rel:
            domain.update(row)
    for rule in program.rules:
        for lit in [RelLiteral(atom=rule.head), *rule.body]:
            terms: Iterable[Term] = lit.atom.args if isinstance(lit, RelLiteral) else (lit.left, lit.right)
            domain.update(t.value for t in terms if isinstance(t, Constant))
    return sorted(domain, key=lambda v: (isinstance(v, str), v))


def naive_evaluate(program: Program, instance: Instance) -> dict[PredicateRef, Relation]:
    """Fixpoint of all-assignment rule application, stratum by stratum."""
    defined = set(program.defined_predicates())
    for pred in program.input_predicates():
        if pred not in instance:
            raise MissingRelationError(str(pred))
    for decl in program.declared(Role.SOURCE):
        if decl.predicate not in defined and decl.predicate not in instance:
            raise MissingRelationError(str(decl.predicate))

    domain = _active_domain(program, instance)
    current: dict[PredicateRef, Relation] = dict(instance)
    for pred in defined:
        current[pred] = frozenset()

    for stratum in stratify(program):
        rules = [r for r in program.rules if r.head.predicate in stratum]
        changed = True
        while changed:
            changed = False
            for rule in rules:
                names = sorted({v.name for v in rule.variables()})
                derived: set[Row] = set()
                for values in itertools.product(domain, repeat=len(names)):
                    assignment = dict(zip(names, values))
                    if _holds(rule, assignment, current):
                        derived.add(tuple(_value(t, assignment) for t in rule.head.args))
                head = rule.head.predicate
                if not derived <= current[head]:
                    current[head] = current[head] | derived
                    changed = True
    return current
