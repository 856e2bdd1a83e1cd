"""Non-recursive Datalog with negation and integer comparisons."""

from .evaluator import CompiledProgram, compile_program, evaluate
from .naive import naive_evaluate
from .parser import parse_program, parse_rule
from .simplify import simplify
from .stratify import stratify
from .unfold import unfold
from .wellformed import check_program

__all__ = [
    "CompiledProgram",
    "check_program",
    "compile_program",
    "evaluate",
    "naive_evaluate",
    "parse_program",
    "parse_rule",
    "simplify",
    "stratify",
    "unfold",
]
