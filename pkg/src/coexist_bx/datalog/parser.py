"""Parser for ``.dl`` rule files."""

from __future__ import annotations

import json
import logging
from typing import Any, Union

import lark
from lark import Token, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from ..errors import DatalogError, DatalogSyntaxError
from ..models.datalog import (
    Atom,
    CompOp,
    Comparison,
    Constant,
    Declaration,
    PredicateRef,
    Program,
    RelLiteral,
    Role,
    Rule,
    Term,
    Variable,
)
from .wellformed import check_program

logger = logging.getLogger(__name__)

DATALOG_GRAMMAR = r"""
    start: _statement*

    _statement: declaration
              | rule

    declaration: PRED PRED "/" INT "."                  -> arity_declaration
               | PRED PRED "(" PRED ("," PRED)* ")" "."  -> attribute_declaration

    rule: atom ":-" literal ("," literal)* "."

    literal: NOT? atom                    -> rel_literal
           | NOT? comparison              -> cmp_literal
           | NOT? "(" comparison ")"      -> cmp_literal

    comparison: term COMP_OP term

    atom: PRED "(" (term ("," term)*)? ")"

    term: VAR     -> variable
        | INT     -> integer
        | STRING  -> string

    NOT.2: /not\b/
    PRED: /[+-]?[a-z][A-Za-z0-9_]*/
    VAR: /[A-Z][A-Za-z0-9_]*/
    INT: /[+-]?[0-9]+/
    STRING: /"(\\.|[^"\\])*"/
    COMP_OP: "<=" | ">=" | "<>" | "<" | ">" | "="
    COMMENT: /%[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_parser = lark.Lark(DATALOG_GRAMMAR, parser="lalr")


def _role(token: Token) -> Role:
    try:
        return Role(str(token))
    except ValueError:
        roles = ", ".join(r.value for r in Role)
        raise DatalogSyntaxError(
            f"unknown role {token!s}, expected one of {roles}", token.line or 0, token.column or 0
        )


def _predicate(token: Token) -> PredicateRef:
    try:
        return PredicateRef.parse(str(token))
    except ValueError as e:
        raise DatalogSyntaxError(f"bad predicate {token!s}: {e}", token.line or 0, token.column or 0)


@v_args(inline=True)
class _ProgramBuilder(Transformer):
    """Turns the parse tree into model objects."""

    def start(self, *statements: Union[Declaration, Rule]) -> list[Union[Declaration, Rule]]:
        return list(statements)

    def arity_declaration(self, role: Token, pred: Token, arity: Token) -> Declaration:
        return Declaration(predicate=_predicate(pred), arity=int(arity), role=_role(role))

    def attribute_declaration(self, role: Token, pred: Token, *attrs: Token) -> Declaration:
        for attr in attrs:
            if str(attr)[0] in "+-":
                raise DatalogSyntaxError(f"bad attribute name {attr!s}", attr.line or 0, attr.column or 0)
        return Declaration(
            predicate=_predicate(pred),
            arity=len(attrs),
            role=_role(role),
            attributes=tuple(str(a) for a in attrs),
        )

    def rule(self, head: Atom, *body: Any) -> Rule:
        return Rule(head=head, body=tuple(body))

    def rel_literal(self, *children: Any) -> RelLiteral:
        return RelLiteral(atom=children[-1], negated=len(children) == 2)

    def cmp_literal(self, *children: Any) -> Comparison:
        comparison: Comparison = children[-1]
        return comparison.negate() if len(children) == 2 else comparison

    def comparison(self, left: Term, op: Token, right: Term) -> Comparison:
        for side in (left, right):
            if isinstance(side, Constant) and not side.is_integer:
                raise DatalogSyntaxError(
                    f"string constant {side} in comparison", op.line or 0, op.column or 0
                )
        return Comparison(left=left, op=CompOp(str(op)), right=right)

    def atom(self, pred: Token, *args: Term) -> Atom:
        return Atom(predicate=_predicate(pred), args=tuple(args))

    def variable(self, token: Token) -> Variable:
        return Variable(name=str(token))

    def integer(self, token: Token) -> Constant:
        return Constant(value=int(token))

    def string(self, token: Token) -> Constant:
        return Constant(value=json.loads(str(token)))


def parse_program(text: str) -> Program:
    """Parse ``.dl`` text into a checked ``Program``.

    Raises ``DatalogSyntaxError`` with line/column, ``SafetyError`` or
    ``ArityError``.
    """
    try:
        tree = _parser.parse(text)
        statements = _ProgramBuilder().transform(tree)
    except UnexpectedInput as e:
        line = e.line if e.line and e.line > 0 else 0
        column = e.column if e.column and e.column > 0 else 0
        raise DatalogSyntaxError(str(e).strip().splitlines()[0], line, column)
    except VisitError as e:
        if isinstance(e.orig_exc, DatalogError):
            raise e.orig_exc
        raise DatalogSyntaxError(str(e.orig_exc), 0, 0)

    declarations = tuple(s for s in statements if isinstance(s, Declaration))
    rules = tuple(s for s in statements if isinstance(s, Rule))
    program = check_program(Program(declarations=declarations, rules=rules))
    logger.debug("Parsed %d declarations and %d rules", len(declarations), len(rules))
    return program


def parse_rule(text: str) -> Rule:
    """Parse a single rule, e.g. ``"v1(X) :- s(X), 4 < X."``."""
    program = parse_program(text)
    if len(program.rules) != 1 or program.declarations:
        raise DatalogSyntaxError("expected exactly one rule", 1, 1)
    return program.rules[0]
