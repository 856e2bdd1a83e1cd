"""Stratification for the non-recursive dialect."""

from __future__ import annotations

from ..errors import StratificationError
from ..models.datalog import PredicateRef, Program


def dependency_graph(program: Program) -> dict[PredicateRef, list[PredicateRef]]:
    """Map each predicate to the body predicates its rules read."""
    graph: dict[PredicateRef, list[PredicateRef]] = {}
    for rule in program.rules:
        deps = graph.setdefault(rule.head.predicate, [])
        for lit in rule.relational():
            graph.setdefault(lit.predicate, [])
            if lit.predicate not in deps:
                deps.append(lit.predicate)
    return graph


def _find_cycle(graph: dict[PredicateRef, list[PredicateRef]]) -> list[PredicateRef] | None:
    white, grey, black = 0, 1, 2
    colour = {p: white for p in graph}
    path: list[PredicateRef] = []

    def visit(node: PredicateRef) -> list[PredicateRef] | None:
        colour[node] = grey
        path.append(node)
        for dep in graph[node]:
            if colour[dep] == grey:
                return path[path.index(dep):] + [dep]
            if colour[dep] == white:
                found = visit(dep)
                if found:
                    return found
        path.pop()
        colour[node] = black
        return None

    for node in graph:
        if colour[node] == white:
            found = visit(node)
            if found:
                return found
    return None


def stratify(program: Program) -> list[frozenset[PredicateRef]]:
    """Group predicates into strata by dependency depth.

    Stratum 0 holds the predicates no rule defines; every other predicate sits
    one stratum above the deepest predicate its rules read, so negated and
    positive dependencies are always fully computed earlier. Recursion of any
    kind is rejected.
    """
    graph = dependency_graph(program)
    cycle = _find_cycle(graph)
    if cycle:
        raise StratificationError([str(p) for p in cycle])

    defined = set(program.defined_predicates())
    levels: dict[PredicateRef, int] = {}

    def level(pred: PredicateRef) -> int:
        if pred not in levels:
            deps = graph[pred]
            if pred in defined:
                levels[pred] = 1 + max((level(d) for d in deps), default=0)
            else:
                levels[pred] = 0
        return levels[pred]

    for pred in graph:
        level(pred)

    if not levels:
        return []
    strata: list[set[PredicateRef]] = [set() for _ in range(max(levels.values()) + 1)]
    for pred, lvl in levels.items():
        strata[lvl].add(pred)
    return [frozenset(s) for s in strata if s]
