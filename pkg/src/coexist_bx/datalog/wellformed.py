"""Well-formedness checks: arity consistency and rule safety."""

from __future__ import annotations

from ..errors import ArityError, DatalogError, SafetyError
from ..models.datalog import Atom, PredicateRef, Program, RelLiteral, Rule, Variable


def check_arities(program: Program) -> dict[PredicateRef, int]:
    """Every (name, flavor) pair must have exactly one arity program-wide."""
    arities: dict[PredicateRef, int] = {}
    for decl in program.declarations:
        if decl.predicate in arities:
            if arities[decl.predicate] != decl.arity:
                raise ArityError(str(decl.predicate), arities[decl.predicate], decl.arity)
            raise DatalogError(f"predicate {decl.predicate} declared twice")
        arities[decl.predicate] = decl.arity

    def see(atom: Atom) -> None:
        expected = arities.setdefault(atom.predicate, atom.arity)
        if expected != atom.arity:
            raise ArityError(str(atom.predicate), expected, atom.arity)

    for rule in program.rules:
        see(rule.head)
        for lit in rule.relational():
            see(lit.atom)
    return arities


def unsafe_variable(rule: Rule) -> Variable | None:
    """First variable not bound by a positive relational literal, if any."""
    bound: set[Variable] = set()
    for atom in rule.positive_atoms():
        bound.update(atom.variables())

    for v in rule.head.variables():
        if v not in bound:
            return v
    for lit in rule.body:
        if isinstance(lit, RelLiteral) and not lit.negated:
            continue
        for v in lit.variables():
            if v not in bound:
                return v
    return None


def check_rule_safety(rule: Rule) -> None:
    variable = unsafe_variable(rule)
    if variable is not None:
        raise SafetyError(str(rule), variable.name)


def check_program(program: Program) -> Program:
    """Validate ``program`` and return it unchanged."""
    check_arities(program)
    for rule in program.rules:
        check_rule_safety(rule)
    return program
