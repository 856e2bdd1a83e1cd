"""Unit tests for the .dl parser and well-formedness checks."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coexist_bx.datalog import parse_program, parse_rule
from coexist_bx.errors import ArityError, DatalogError, DatalogSyntaxError, SafetyError
from coexist_bx.models.datalog import Comparison, CompOp, Flavor, RelLiteral, Role


class TestParseRule:
    """Test cases for single rules."""

    def test_selection_rule(self):
        """A get rule parses into a positive literal and a comparison."""
        rule = parse_rule("v1(X) :- s(X), 4 < X.")

        assert str(rule.head.predicate) == "v1"
        assert rule.head.arity == 1
        assert len(rule.body) == 2
        source, guard = rule.body
        assert isinstance(source, RelLiteral) and not source.negated
        assert str(source.predicate) == "s"
        assert isinstance(guard, Comparison)
        assert guard.op == CompOp.LT
        assert str(guard) == "4 < X"

    def test_delta_head(self):
        """A +s head is the insert delta of s."""
        rule = parse_rule("+s(X) :- v1(X), not s(X), 4 < X.")

        assert rule.head.predicate.flavor == Flavor.DELTA_INSERT
        assert rule.head.predicate.relation.name == "s"
        assert rule.relational()[1].negated

    def test_parenthesized_negated_comparison(self):
        rule = parse_rule("v1(X) :- v1_ud(X), not (4 < X).")

        cmp = rule.comparisons()[0]
        assert cmp.negated
        assert rule.relational()[0].predicate.flavor == Flavor.UNDEF_AUX

    @pytest.mark.parametrize(
        "text",
        [
            "v1(X) :- s(X), 4 < X.",
            "+s(X) :- v1_cur(X), not -v1(X), not s(X), 4 < X.",
            "-v1_ud(X) :- v1_ud(X), not v1(X), not 4 < X.",
            'p(X, Y) :- q(X, Y, "a b"), X <> Y, X >= -3.',
        ],
    )
    def test_printing_is_stable(self, text):
        """Printing a parsed rule gives back the canonical text."""
        assert str(parse_rule(text)) == text

    def test_unsafe_rule(self):
        """A variable only under negation is unsafe."""
        with pytest.raises(SafetyError) as exc:
            parse_rule("p(X) :- not q(X).")
        assert exc.value.variable == "X"

    def test_unsafe_comparison_variable(self):
        with pytest.raises(SafetyError):
            parse_rule("p(X) :- q(X), Y < 3.")

    def test_more_than_one_rule(self):
        with pytest.raises(DatalogSyntaxError):
            parse_rule("p(X) :- q(X). r(X) :- q(X).")


class TestParseProgram:
    """Test cases for whole programs."""

    def test_declarations(self):
        """Arity and attribute declarations both parse."""
        program = parse_program(
            "source s(pk, x).\n"
            "view v1/2.\n"
            "derived v1_cur/2.\n"
        )

        s, v1, cur = program.declarations
        assert s.role == Role.SOURCE and s.arity == 2 and s.attributes == ("pk", "x")
        assert s.columns() == ("pk", "x")
        assert v1.role == Role.VIEW and v1.attributes is None
        assert v1.columns() == ("c1", "c2")
        assert cur.predicate.flavor == Flavor.CURRENT
        assert str(program) == "source s(pk, x).\nview v1/2.\nderived v1_cur/2.\n"

    def test_comments_and_blank_lines(self):
        program = parse_program("% a comment\n\nsource s(x).  % trailing\n")
        assert len(program.declarations) == 1
        assert program.is_empty

    def test_empty_program(self):
        program = parse_program("")
        assert program.declarations == () and program.rules == ()
        assert str(program) == ""

    def test_syntax_error_location(self):
        """Syntax errors carry the line of the offending token."""
        with pytest.raises(DatalogSyntaxError) as exc:
            parse_program("source s(x).\nv1(X) :- s(X) 4 < X.\n")
        assert exc.value.line == 2
        assert "line 2" in str(exc.value)

    def test_arity_clash(self):
        with pytest.raises(ArityError) as exc:
            parse_program("p(X) :- q(X).\nr(Y) :- q(Y, Y).")
        assert exc.value.predicate == "q"

    def test_declared_arity_clash(self):
        with pytest.raises(ArityError):
            parse_program("source s/2.\nv(X) :- s(X).")

    def test_duplicate_declaration(self):
        with pytest.raises(DatalogError, match="declared twice"):
            parse_program("source s/1.\nsource s/1.")

    def test_string_in_comparison(self):
        with pytest.raises(DatalogSyntaxError, match="string constant"):
            parse_program('p(X) :- q(X), X < "a".')

    def test_errors_are_value_errors(self):
        """Callers that only catch ValueError still see parse failures."""
        with pytest.raises(ValueError):
            parse_program("p(X) :-")


class TestRoleNames:
    """Role keywords are only special at the start of a declaration."""

    @pytest.mark.parametrize(
        "text",
        [
            "view(X) :- s(X).",
            "source(X, Y) :- derived(X), view(Y).",
            "p(X) :- s(X), not view(X).",
        ],
    )
    def test_role_names_as_predicates(self, text):
        assert str(parse_rule(text)) == text

    def test_declaring_a_role_named_predicate(self):
        program = parse_program("source view/1.\nview source(x).\nsource(X) :- view(X).")

        first, second = program.declarations
        assert first.role == Role.SOURCE and str(first.predicate) == "view"
        assert second.role == Role.VIEW and str(second.predicate) == "source"
        assert str(program.rules[0].head.predicate) == "source"

    def test_unknown_role(self):
        with pytest.raises(DatalogSyntaxError, match="unknown role table") as exc:
            parse_program("source s(x).\ntable t/1.")
        assert exc.value.line == 2


# Predicate surface forms and the arity each one is used with.
ARITIES = {
    "p": 1,
    "q": 2,
    "r": 0,
    "view": 1,
    "source": 2,
    "derived": 1,
    "+p": 1,
    "-q": 2,
    "s_ud": 1,
    "s_cur": 2,
}
BASE_NAMES = ["p", "q", "r", "view", "source", "derived"]
VARIABLES = ["X", "Y", "Z"]

integers = st.integers(min_value=-20, max_value=20).map(str)
strings = st.text(max_size=4).map(json.dumps)


def _atom(draw, name, terms):
    args = [draw(terms) for _ in range(ARITIES[name])]
    return f"{name}({', '.join(args)})", {a for a in args if a in VARIABLES}


@st.composite
def rule_texts(draw):
    """Safe rules in canonical printed form."""
    names = st.sampled_from(sorted(ARITIES))
    open_terms = st.one_of(st.sampled_from(VARIABLES), integers, strings)
    positives, bound = [], set()
    for name in draw(st.lists(names, min_size=1, max_size=3)):
        atom, variables = _atom(draw, name, open_terms)
        positives.append(atom)
        bound |= variables
    bound = sorted(bound)
    constants = st.one_of(integers, strings)
    closed = st.one_of(st.sampled_from(bound), constants) if bound else constants
    numeric = st.one_of(st.sampled_from(bound), integers) if bound else integers

    negatives = [
        f"not {_atom(draw, name, closed)[0]}" for name in draw(st.lists(names, max_size=2))
    ]
    comparisons = []
    for _ in range(draw(st.integers(min_value=0, max_value=2))):
        op = draw(st.sampled_from([op.value for op in CompOp]))
        text = f"{draw(numeric)} {op} {draw(numeric)}"
        comparisons.append(f"not {text}" if draw(st.booleans()) else text)

    body = draw(st.permutations(positives + negatives + comparisons))
    head, _ = _atom(draw, draw(names), closed)
    return f"{head} :- {', '.join(body)}."


@st.composite
def program_texts(draw):
    lines = []
    for name in draw(st.lists(st.sampled_from(BASE_NAMES), unique=True, max_size=3)):
        role = draw(st.sampled_from([r.value for r in Role]))
        arity = ARITIES[name]
        if arity and draw(st.booleans()):
            attrs = draw(
                st.lists(
                    st.sampled_from(["a", "b", "pk", "x"]), min_size=arity, max_size=arity, unique=True
                )
            )
            lines.append(f"{role} {name}({', '.join(attrs)}).")
        else:
            lines.append(f"{role} {name}/{arity}.")
    lines.extend(draw(st.lists(rule_texts(), max_size=4)))
    return "".join(f"{line}\n" for line in lines)


class TestRoundTrip:
    """Printing a parsed program and parsing it again changes nothing."""

    @settings(max_examples=300, deadline=None)
    @given(program_texts())
    def test_parse_print_parse(self, text):
        program = parse_program(text)

        assert str(program) == text
        assert parse_program(str(program)) == program

    def test_string_escapes(self):
        program = parse_program('p(X) :- q(X, "a\\"b\\\\c\\n").')

        constant = program.rules[0].body[0].atom.args[1]
        assert constant.value == 'a"b\\c\n'
        assert parse_program(str(program)) == program

    def test_nullary_atoms(self):
        program = parse_program("r() :- r(), not r().")
        assert str(program) == "r() :- r(), not r().\n"
