"""Unit tests for stratification and evaluation."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coexist_bx.datalog import compile_program, evaluate, naive_evaluate, parse_program, stratify
from coexist_bx.errors import EvaluationTypeError, MissingRelationError, StratificationError
from coexist_bx.models.datalog import PredicateRef
from coexist_bx.models.relation import instance_from, relation
from coexist_bx.models.verification import Universe

P = PredicateRef.parse


class TestStratify:
    """Test cases for stratify."""

    def test_levels(self):
        """Negated dependencies are computed in an earlier stratum."""
        program = parse_program("p(X) :- s(X), not q(X).\nq(X) :- t(X).")

        strata = stratify(program)

        assert strata == [frozenset({P("s"), P("t")}), frozenset({P("q")}), frozenset({P("p")})]

    def test_recursion_rejected(self):
        with pytest.raises(StratificationError) as exc:
            stratify(parse_program("p(X) :- p(X)."))
        assert exc.value.cycle == ["p", "p"]

    def test_negative_cycle_rejected(self):
        program = parse_program("p(X) :- s(X), not q(X).\nq(X) :- s(X), not p(X).")
        with pytest.raises(StratificationError):
            stratify(program)

    def test_empty(self):
        assert stratify(parse_program("")) == []


class TestEvaluate:
    """Test cases for semi-naive evaluation."""

    def test_selection(self):
        program = parse_program("source s(x).\nview v1(x).\nv1(X) :- s(X), 4 < X.")

        out = evaluate(program, instance_from({"s": [(1,), (5,), (9,)]}))

        assert out[P("v1")] == relation((5,), (9,))

    def test_negation_and_join(self):
        program = parse_program(
            "r(X, Y) :- a(X), b(X, Y), not c(Y).\n"
            "c(Y) :- d(Y), Y > 2."
        )
        instance = instance_from(
            {"a": [(1,), (2,)], "b": [(1, 3), (1, 1), (2, 4), (5, 5)], "d": [(3,), (1,)]}
        )

        out = evaluate(program, instance)

        assert out[P("c")] == relation((3,))
        assert out[P("r")] == relation((1, 1), (2, 4))

    def test_constants_in_atoms(self):
        program = parse_program('p(X) :- q(X, "k"), r(X, 1).')
        instance = instance_from({"q": [(1, "k"), (2, "k"), (3, "j")], "r": [(1, 1), (2, 2)]})

        assert evaluate(program, instance)[P("p")] == relation((1,))

    def test_input_not_modified(self):
        program = parse_program("v1(X) :- s(X).")
        instance = instance_from({"s": [(1,)]})
        before = dict(instance)

        evaluate(program, instance)

        assert instance == before

    def test_missing_relation(self):
        program = parse_program("v1(X) :- s(X).")
        with pytest.raises(MissingRelationError) as exc:
            evaluate(program, {})
        assert exc.value.predicate == "s"

    def test_declared_source_required(self):
        """A declared source is required even when no rule reads it."""
        program = parse_program("source t(x).\nv1(X) :- s(X).")
        with pytest.raises(MissingRelationError):
            evaluate(program, instance_from({"s": [(1,)]}))

    def test_non_integer_comparison(self):
        program = parse_program("v1(X) :- s(X), 4 < X.")
        with pytest.raises(EvaluationTypeError):
            evaluate(program, instance_from({"s": [("p1",)]}))

    def test_delta_predicates(self):
        """Rules over +v/-v read the delta relations supplied in the instance."""
        program = parse_program("v1(X) :- v1_cur(X), not -v1(X).\nv1(X) :- +v1(X).\nv1_cur(X) :- s(X).")
        instance = instance_from({"s": [(1,), (2,)], "+v1": [(7,)], "-v1": [(2,)]})

        assert evaluate(program, instance)[P("v1")] == relation((1,), (7,))

    def test_compiled_program_reports_inputs(self):
        program = parse_program("source s(x).\nsource v1_ud(x).\nv1(X) :- s(X).\nv1(X) :- v1_ud(X).")

        compiled = compile_program(program)

        assert set(compiled.required) == {P("s"), P("v1_ud")}
        assert compiled.defined == frozenset({P("v1")})
        assert compile_program(program) is compiled


def _family(guard: int, op: str) -> list[str]:
    """The selection programs a derivation produces, for one guard."""
    c = f"{guard} {op} X"
    return [
        f"v1(X) :- s(X), {c}.",
        f"+s(X) :- v1(X), not s(X), {c}.\n-s(X) :- not v1(X), s(X), {c}.",
        f"+s(X) :- v1_cur(X), not -v1(X), not s(X), {c}.\n"
        f"+s(X) :- +v1(X), not s(X), {c}.\n"
        f"-s(X) :- not v1_cur(X), not +v1(X), s(X), {c}.\n"
        f"-s(X) :- -v1(X), not +v1(X), s(X), {c}.\n"
        f"v1_cur(X) :- s(X), {c}.",
        f"+v1_ud(X) :- not v1_ud(X), v1(X), not {c}.\n-v1_ud(X) :- v1_ud(X), not v1(X), not {c}.",
        f"v1(X) :- s(X), {c}.\nv1(X) :- v1_ud(X), not {c}.",
    ]


unary = st.frozensets(st.tuples(st.integers(min_value=0, max_value=10)), max_size=4)


class TestOracleEquivalence:
    """Semi-naive evaluation agrees with the naive fixpoint."""

    @settings(max_examples=1000, deadline=None)
    @given(
        guard=st.integers(min_value=0, max_value=10),
        op=st.sampled_from(["<", "<=", ">", ">=", "=", "<>"]),
        which=st.integers(min_value=0, max_value=4),
        relations=st.fixed_dictionaries(
            {name: unary for name in ["s", "v1", "+v1", "-v1", "v1_ud"]}
        ),
    )
    def test_selection_family(self, guard, op, which, relations):
        program = parse_program(_family(guard, op)[which])
        instance = {P(name): rel for name, rel in relations.items()}
        defined = program.defined_predicates()

        fast = evaluate(program, instance)
        slow = naive_evaluate(program, instance)

        assert {p: fast[p] for p in defined} == {p: slow[p] for p in defined}

    @pytest.mark.parametrize(
        "which", [0, 1, pytest.param(2, marks=pytest.mark.slow), 3, 4]
    )
    def test_selection_family_exhaustive(self, which):
        """Every instance over 0..6 with at most three tuples per relation.

        Inputs past the second range over relations of at most one tuple.
        """
        program = parse_program(_family(4, "<")[which])
        inputs = sorted(compile_program(program).required, key=lambda p: (p.is_delta, str(p)))
        relations = Universe.from_range(0, 6, max_size=3).relations(1)
        axes = [relations if i < 2 else relations[:8] for i in range(len(inputs))]
        defined = program.defined_predicates()

        for combo in itertools.product(*axes):
            instance = dict(zip(inputs, combo))
            fast = evaluate(program, instance)
            slow = naive_evaluate(program, instance)
            assert {p: fast[p] for p in defined} == {p: slow[p] for p in defined}, instance
