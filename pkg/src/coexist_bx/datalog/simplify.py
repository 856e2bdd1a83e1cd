"""Drop rules that can never fire and literals that always hold."""

from __future__ import annotations

import logging
from typing import Optional

from ..models.datalog import Comparison, Constant, Literal, Program, Rule
from .evaluator import _OPS

logger = logging.getLogger(__name__)


def _ground_value(cmp: Comparison) -> Optional[bool]:
    if not isinstance(cmp.left, Constant) or not isinstance(cmp.right, Constant):
        return None
    if not (cmp.left.is_integer and cmp.right.is_integer):
        return None
    return _OPS[cmp.op](cmp.left.value, cmp.right.value) != cmp.negated


def simplify_rule(rule: Rule) -> Optional[Rule]:
    """``None`` when the body is unsatisfiable on its face."""
    body: list[Literal] = []
    for lit in rule.body:
        if isinstance(lit, Comparison):
            value = _ground_value(lit)
            if value is False:
                return None
            if value is True:
                continue
        if lit.negate() in body:
            return None
        body.append(lit)
    if not body:
        # keep one always-true literal; bodies are never empty
        body = [rule.body[0]]
    return Rule(head=rule.head, body=tuple(body))


def simplify(program: Program) -> Program:
    rules = [r for r in (simplify_rule(rule) for rule in program.rules) if r is not None]
    if len(rules) != len(program.rules):
        logger.debug("Simplifier dropped %d unsatisfiable rules", len(program.rules) - len(rules))
    return program.with_rules(rules)
