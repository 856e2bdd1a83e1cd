"""Bottom-up, stratum-by-stratum, semi-naive evaluation."""

from __future__ import annotations

import functools
import logging
import operator
from typing import Any, Callable, Mapping, NamedTuple, Optional

from ..errors import EvaluationTypeError, MissingRelationError
from ..models.datalog import (
    Comparison,
    CompOp,
    PredicateRef,
    Program,
    RelLiteral,
    Role,
    Rule,
    Term,
    Variable,
)
from ..models.relation import Instance, Relation, Row, Value
from .stratify import stratify

logger = logging.getLogger(__name__)

Binding = dict[str, Value]
Pattern = tuple[tuple[bool, Any], ...]
Check = Callable[[Binding, Mapping[PredicateRef, Relation]], bool]
RelationFor = Callable[[int, PredicateRef], Relation]

_OPS: dict[CompOp, Callable[[int, int], bool]] = {
    CompOp.LT: operator.lt,
    CompOp.GT: operator.gt,
    CompOp.LE: operator.le,
    CompOp.GE: operator.ge,
    CompOp.EQ: operator.eq,
    CompOp.NE: operator.ne,
}

_UNBOUND = object()


def _pattern(args: tuple[Term, ...]) -> Pattern:
    return tuple(
        (True, t.name) if isinstance(t, Variable) else (False, t.value) for t in args
    )


def _instantiate(pattern: Pattern, binding: Binding) -> Row:
    return tuple(binding[key] if is_var else key for is_var, key in pattern)


def _match(pattern: Pattern, row: Row, binding: Binding) -> Optional[Binding]:
    if len(row) != len(pattern):
        return None
    extended = binding
    for (is_var, key), value in zip(pattern, row):
        if not is_var:
            if key != value:
                return None
            continue
        bound = extended.get(key, _UNBOUND)
        if bound is _UNBOUND:
            if extended is binding:
                extended = dict(binding)
            extended[key] = value
        elif bound != value:
            return None
    return extended


def _comparison_check(cmp: Comparison) -> Check:
    op = _OPS[cmp.op]
    negated = cmp.negated
    left, right = _pattern((cmp.left, cmp.right))

    def check(binding: Binding, full: Mapping[PredicateRef, Relation]) -> bool:
        lhs = binding[left[1]] if left[0] else left[1]
        rhs = binding[right[1]] if right[0] else right[1]
        if type(lhs) is not int or type(rhs) is not int:
            raise EvaluationTypeError(f"comparison {cmp} over non-integer values {lhs!r}, {rhs!r}")
        return op(lhs, rhs) != negated

    return check


def _negation_check(lit: RelLiteral) -> Check:
    predicate = lit.predicate
    pattern = _pattern(lit.atom.args)

    def check(binding: Binding, full: Mapping[PredicateRef, Relation]) -> bool:
        return _instantiate(pattern, binding) not in full[predicate]

    return check


class _Scan(NamedTuple):
    predicate: PredicateRef
    pattern: Pattern
    checks: tuple[Check, ...]


class CompiledRule:
    """A rule turned into a join plan: positive scans with filters pushed down."""

    def __init__(self, rule: Rule):
        self.rule = rule
        self.head = rule.head.predicate
        self.head_pattern = _pattern(rule.head.args)

        positives = [lit for lit in rule.relational() if not lit.negated]
        bound_after: list[set[str]] = []
        bound: set[str] = set()
        for lit in positives:
            bound |= {v.name for v in lit.variables()}
            bound_after.append(set(bound))

        placed: list[list[Check]] = [[] for _ in range(len(positives) + 1)]
        for lit in rule.body:
            if isinstance(lit, RelLiteral) and not lit.negated:
                continue
            needed = {v.name for v in lit.variables()}
            slot = 0
            if needed:
                slot = next(
                    (i + 1 for i, names in enumerate(bound_after) if needed <= names),
                    len(positives),
                )
            check = (
                _comparison_check(lit) if isinstance(lit, Comparison) else _negation_check(lit)
            )
            placed[slot].append(check)

        self.initial_checks = tuple(placed[0])
        self.scans = tuple(
            _Scan(lit.predicate, _pattern(lit.atom.args), tuple(placed[i + 1]))
            for i, lit in enumerate(positives)
        )

    def positions_reading(self, predicates: frozenset[PredicateRef]) -> list[int]:
        return [i for i, scan in enumerate(self.scans) if scan.predicate in predicates]

    def fire(self, relation_for: RelationFor, full: Mapping[PredicateRef, Relation]) -> set[Row]:
        """All head rows derivable with scan ``i`` reading ``relation_for(i, pred)``."""
        out: set[Row] = set()
        start: Binding = {}
        if not all(check(start, full) for check in self.initial_checks):
            return out
        scans = self.scans
        depth = len(scans)

        def extend(i: int, binding: Binding) -> None:
            if i == depth:
                out.add(_instantiate(self.head_pattern, binding))
                return
            scan = scans[i]
            for row in relation_for(i, scan.predicate):
                extended = _match(scan.pattern, row, binding)
                if extended is None:
                    continue
                if all(check(extended, full) for check in scan.checks):
                    extend(i + 1, extended)

        extend(0, start)
        return out


class CompiledProgram:
    """A stratified program ready to run against instances."""

    def __init__(self, program: Program):
        self.program = program
        self.strata = stratify(program)
        self.defined = frozenset(program.defined_predicates())
        required = list(program.input_predicates())
        for decl in program.declared(Role.SOURCE):
            if decl.predicate not in self.defined and decl.predicate not in required:
                required.append(decl.predicate)
        self.required = tuple(required)
        self._rules = [
            (heads, [CompiledRule(r) for r in program.rules if r.head.predicate in heads])
            for heads in (stratum & self.defined for stratum in self.strata)
            if heads
        ]

    def run(self, instance: Instance) -> dict[PredicateRef, Relation]:
        """Return ``instance`` extended with every derived relation.

        The input mapping is not modified.
        """
        for pred in self.required:
            if pred not in instance:
                raise MissingRelationError(str(pred))
        result: dict[PredicateRef, Relation] = dict(instance)
        for heads, rules in self._rules:
            self._semi_naive(heads, rules, result)
        return result

    @staticmethod
    def _semi_naive(
        heads: frozenset[PredicateRef],
        rules: list[CompiledRule],
        result: dict[PredicateRef, Relation],
    ) -> None:
        for pred in heads:
            result[pred] = frozenset()

        delta: dict[PredicateRef, set[Row]] = {pred: set() for pred in heads}
        for rule in rules:
            delta[rule.head] |= rule.fire(lambda _i, p: result[p], result)

        rounds = 1
        while any(delta.values()):
            for pred in heads:
                result[pred] = result[pred] | delta[pred]
            fresh: dict[PredicateRef, set[Row]] = {pred: set() for pred in heads}
            for rule in rules:
                for position in rule.positions_reading(heads):
                    fresh[rule.head] |= rule.fire(
                        lambda j, p, position=position: delta[p] if j == position else result[p],
                        result,
                    )
            delta = {pred: fresh[pred] - result[pred] for pred in heads}
            rounds += 1
        logger.debug("Stratum %s converged after %d rounds", sorted(map(str, heads)), rounds)


@functools.lru_cache(maxsize=512)
def compile_program(program: Program) -> CompiledProgram:
    return CompiledProgram(program)


def evaluate(program: Program, instance: Instance) -> dict[PredicateRef, Relation]:
    """Evaluate ``program`` over ``instance``; pure and deterministic."""
    return compile_program(program).run(instance)
