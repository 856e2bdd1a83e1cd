"""Pydantic models for the Datalog dialect shared by every pipeline stage."""

from __future__ import annotations

import json
import re
from enum import Enum
from typing import Iterator, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr, field_validator

VARIABLE_RE = re.compile(r"^[A-Z][A-Za-z0-9_]*$")
IDENTIFIER_RE = re.compile(r"^[a-z][A-Za-z0-9_]*$")


class Flavor(str, Enum):
    """How a predicate relates to its underlying relation."""

    BASE = "base"
    DELTA_INSERT = "delta-insert"
    DELTA_DELETE = "delta-delete"
    CURRENT = "current"
    UNDEF_AUX = "undef-aux"
    PLUSMINUS = "plusminus"


class Role(str, Enum):
    """Declared role of a predicate."""

    SOURCE = "source"
    VIEW = "view"
    DERIVED = "derived"


class CompOp(str, Enum):
    """Comparison operators; values are the surface spelling."""

    LT = "<"
    GT = ">"
    LE = "<="
    GE = ">="
    EQ = "="
    NE = "<>"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class Variable(_Frozen):
    """A rule variable such as ``X``."""

    name: str

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        if not VARIABLE_RE.match(v):
            raise ValueError(f"invalid variable name {v!r}")
        return v

    def __str__(self) -> str:
        return self.name


class Constant(_Frozen):
    """An integer or string constant."""

    value: Union[StrictInt, StrictStr]

    @property
    def is_integer(self) -> bool:
        return isinstance(self.value, int)

    def __str__(self) -> str:
        if isinstance(self.value, str):
            return json.dumps(self.value)
        return str(self.value)


Term = Union[Variable, Constant]


class PredicateRef(_Frozen):
    """A predicate: relation name plus flavor.

    For the two delta flavors ``name`` is the surface name of the relation the
    delta applies to, so ``+v1_ud`` is ``PredicateRef(name="v1_ud",
    flavor=DELTA_INSERT)``.
    """

    name: str
    flavor: Flavor = Flavor.BASE

    @field_validator("name")
    @classmethod
    def validate_base_name(cls, v: str) -> str:
        if not IDENTIFIER_RE.match(v):
            raise ValueError(f"invalid predicate name {v!r}")
        return v

    @classmethod
    def parse(cls, surface: str) -> "PredicateRef":
        """Map a surface form (``r``, ``+r``, ``-r``, ``r_cur``, ``r_ud``, ``pm_r``)."""
        if surface.startswith("+") or surface.startswith("-"):
            target = cls.parse(surface[1:])
            if target.is_delta:
                raise ValueError(f"nested delta predicate {surface!r}")
            flavor = Flavor.DELTA_INSERT if surface[0] == "+" else Flavor.DELTA_DELETE
            return cls(name=str(target), flavor=flavor)
        if surface.startswith("pm_") and len(surface) > 3:
            return cls(name=surface[3:], flavor=Flavor.PLUSMINUS)
        if surface.endswith("_ud") and len(surface) > 3:
            return cls(name=surface[:-3], flavor=Flavor.UNDEF_AUX)
        if surface.endswith("_cur") and len(surface) > 4:
            return cls(name=surface[:-4], flavor=Flavor.CURRENT)
        return cls(name=surface)

    @property
    def is_delta(self) -> bool:
        return self.flavor in (Flavor.DELTA_INSERT, Flavor.DELTA_DELETE)

    @property
    def relation(self) -> "PredicateRef":
        """The relation a delta predicate applies to (``self`` otherwise)."""
        if self.is_delta:
            return PredicateRef.parse(self.name)
        return self

    def inserted(self) -> "PredicateRef":
        return PredicateRef(name=str(self), flavor=Flavor.DELTA_INSERT)

    def deleted(self) -> "PredicateRef":
        return PredicateRef(name=str(self), flavor=Flavor.DELTA_DELETE)

    def current(self) -> "PredicateRef":
        return PredicateRef(name=self.name, flavor=Flavor.CURRENT)

    def undef_aux(self) -> "PredicateRef":
        return PredicateRef(name=self.name, flavor=Flavor.UNDEF_AUX)

    def plusminus(self) -> "PredicateRef":
        return PredicateRef(name=self.name, flavor=Flavor.PLUSMINUS)

    def __str__(self) -> str:
        if self.flavor == Flavor.DELTA_INSERT:
            return f"+{self.name}"
        if self.flavor == Flavor.DELTA_DELETE:
            return f"-{self.name}"
        if self.flavor == Flavor.CURRENT:
            return f"{self.name}_cur"
        if self.flavor == Flavor.UNDEF_AUX:
            return f"{self.name}_ud"
        if self.flavor == Flavor.PLUSMINUS:
            return f"pm_{self.name}"
        return self.name


class Atom(_Frozen):
    """``predicate(args...)``."""

    predicate: PredicateRef
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> Iterator[Variable]:
        for arg in self.args:
            if isinstance(arg, Variable):
                yield arg

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(str(a) for a in self.args)})"


class RelLiteral(_Frozen):
    """A relational body literal, possibly negated."""

    atom: Atom
    negated: bool = False

    @property
    def predicate(self) -> PredicateRef:
        return self.atom.predicate

    def negate(self) -> "RelLiteral":
        return RelLiteral(atom=self.atom, negated=not self.negated)

    def variables(self) -> Iterator[Variable]:
        return self.atom.variables()

    def __str__(self) -> str:
        return f"not {self.atom}" if self.negated else str(self.atom)


class Comparison(_Frozen):
    """``left op right`` over integers, possibly negated."""

    left: Term
    op: CompOp
    right: Term
    negated: bool = False

    def negate(self) -> "Comparison":
        return self.model_copy(update={"negated": not self.negated})

    def variables(self) -> Iterator[Variable]:
        for term in (self.left, self.right):
            if isinstance(term, Variable):
                yield term

    def __str__(self) -> str:
        text = f"{self.left} {self.op.value} {self.right}"
        return f"not {text}" if self.negated else text


Literal = Union[RelLiteral, Comparison]


class Rule(_Frozen):
    """``head :- body.``"""

    head: Atom
    body: tuple[Literal, ...] = Field(..., min_length=1)

    def variables(self) -> set[Variable]:
        found = set(self.head.variables())
        for literal in self.body:
            found.update(literal.variables())
        return found

    def positive_atoms(self) -> list[Atom]:
        return [
            lit.atom for lit in self.body if isinstance(lit, RelLiteral) and not lit.negated
        ]

    def relational(self) -> list[RelLiteral]:
        return [lit for lit in self.body if isinstance(lit, RelLiteral)]

    def comparisons(self) -> list[Comparison]:
        return [lit for lit in self.body if isinstance(lit, Comparison)]

    def body_predicates(self) -> set[PredicateRef]:
        return {lit.predicate for lit in self.relational()}

    def __str__(self) -> str:
        return f"{self.head} :- {', '.join(str(lit) for lit in self.body)}."


class Declaration(_Frozen):
    """``source s/1.`` or ``view v1(pk, x).``"""

    predicate: PredicateRef
    arity: int = Field(..., ge=0)
    role: Role
    attributes: Optional[tuple[str, ...]] = None

    @field_validator("attributes")
    @classmethod
    def validate_attributes(cls, v: Optional[tuple[str, ...]]) -> Optional[tuple[str, ...]]:
        if v is not None and len(set(v)) != len(v):
            raise ValueError("attribute names must be distinct")
        return v

    def columns(self) -> tuple[str, ...]:
        """Attribute names, defaulting to ``c1..cn``."""
        if self.attributes:
            return self.attributes
        return tuple(f"c{i}" for i in range(1, self.arity + 1))

    def __str__(self) -> str:
        if self.attributes is not None and len(self.attributes) == self.arity and self.arity:
            return f"{self.role.value} {self.predicate}({', '.join(self.attributes)})."
        return f"{self.role.value} {self.predicate}/{self.arity}."


class Program(_Frozen):
    """Declarations plus an ordered sequence of rules."""

    declarations: tuple[Declaration, ...] = ()
    rules: tuple[Rule, ...] = ()

    def declaration(self, predicate: PredicateRef) -> Optional[Declaration]:
        return next((d for d in self.declarations if d.predicate == predicate), None)

    def declared(self, role: Role) -> list[Declaration]:
        return [d for d in self.declarations if d.role == role]

    def arities(self) -> dict[PredicateRef, int]:
        """Arity of every predicate, from declarations first, then usage."""
        found = {d.predicate: d.arity for d in self.declarations}
        for rule in self.rules:
            found.setdefault(rule.head.predicate, rule.head.arity)
            for lit in rule.relational():
                found.setdefault(lit.predicate, lit.atom.arity)
        return found

    def defined_predicates(self) -> list[PredicateRef]:
        """Rule heads in first-definition order."""
        seen: dict[PredicateRef, None] = {}
        for rule in self.rules:
            seen.setdefault(rule.head.predicate, None)
        return list(seen)

    def input_predicates(self) -> list[PredicateRef]:
        """Predicates read by some body but defined by no rule."""
        defined = set(self.defined_predicates())
        seen: dict[PredicateRef, None] = {}
        for rule in self.rules:
            for lit in rule.relational():
                if lit.predicate not in defined:
                    seen.setdefault(lit.predicate, None)
        return list(seen)

    def rules_for(self, predicate: PredicateRef) -> list[Rule]:
        return [r for r in self.rules if r.head.predicate == predicate]

    def with_rules(self, rules: "tuple[Rule, ...] | list[Rule]") -> "Program":
        """Same declarations, new rules (structural duplicates removed)."""
        return Program(declarations=self.declarations, rules=dedupe_rules(rules))

    def merge(self, other: "Program") -> "Program":
        """Union of declarations and rules, keeping first occurrences."""
        declarations = list(self.declarations)
        for decl in other.declarations:
            if self.declaration(decl.predicate) is None:
                declarations.append(decl)
        return Program(
            declarations=tuple(declarations),
            rules=dedupe_rules([*self.rules, *other.rules]),
        )

    def restrict_to(self, heads: "set[PredicateRef]") -> "Program":
        """Keep only rules whose head is in ``heads``."""
        return self.with_rules([r for r in self.rules if r.head.predicate in heads])

    def pruned(self) -> "Program":
        """Drop declarations of predicates no rule mentions."""
        used: set[PredicateRef] = set()
        for rule in self.rules:
            used.add(rule.head.predicate)
            used.update(rule.body_predicates())
        return Program(
            declarations=tuple(d for d in self.declarations if d.predicate in used),
            rules=self.rules,
        )

    @property
    def is_empty(self) -> bool:
        return not self.rules

    def __str__(self) -> str:
        lines = [str(d) for d in self.declarations]
        lines.extend(str(r) for r in self.rules)
        return "\n".join(lines) + ("\n" if lines else "")


def dedupe_rules(rules: "tuple[Rule, ...] | list[Rule]") -> tuple[Rule, ...]:
    """Drop structurally identical rules and repeated body literals."""
    seen: dict[Rule, None] = {}
    for rule in rules:
        body = tuple(dict.fromkeys(rule.body))
        if body != rule.body:
            rule = Rule(head=rule.head, body=body)
        seen.setdefault(rule, None)
    return tuple(seen)


def var(name: str) -> Variable:
    return Variable(name=name)


def const(value: Union[int, str]) -> Constant:
    return Constant(value=value)


def atom(surface: str, *args: Term) -> Atom:
    return Atom(predicate=PredicateRef.parse(surface), args=tuple(args))
