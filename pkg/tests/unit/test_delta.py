"""Unit tests for the delta algebra."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coexist_bx.datalog import evaluate
from coexist_bx.delta import (
    apply_delta,
    diff,
    normalize_delta,
    plusminus_program,
    tuple_variables,
    undef_split,
)
from coexist_bx.errors import ArityMismatchError, DeltaOverlapError
from coexist_bx.models.datalog import PredicateRef
from coexist_bx.models.relation import Delta, relation

P = PredicateRef.parse

unary = st.frozensets(st.tuples(st.integers(min_value=0, max_value=8)), max_size=5)


class TestDeltaOperations:
    """Test cases for apply, diff, normalize and split."""

    def test_apply(self):
        current = relation((1,), (2,))
        delta = Delta.of(inserted=[(3,)], deleted=[(1,)])
        assert apply_delta(current, delta) == relation((2,), (3,))

    def test_diff(self):
        delta = diff(relation((1,), (2,)), relation((2,), (3,)))
        assert delta.inserted == relation((3,))
        assert delta.deleted == relation((1,))

    def test_normalize_drops_noops(self):
        base = relation((1,), (2,))
        delta = Delta.of(inserted=[(1,), (5,)], deleted=[(2,), (9,)])

        normalized = normalize_delta(base, delta)

        assert normalized == Delta.of(inserted=[(5,)], deleted=[(2,)])

    def test_normalize_overlap(self):
        """A tuple both inserted and deleted is a contradiction."""
        with pytest.raises(DeltaOverlapError) as exc:
            normalize_delta(frozenset(), Delta.of(inserted=[(1,)], deleted=[(1,)]))
        assert exc.value.rows == [(1,)]

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatchError):
            apply_delta(relation((1,)), Delta.of(inserted=[(1, 2)]))

    def test_undef_split(self):
        """Only the part of the view update that reached no source delta remains."""
        view_delta = Delta.of(inserted=[(3,), (5,)], deleted=[(2,)])
        split = undef_split(view_delta, relation((5,)))
        assert split == Delta.of(inserted=[(3,)], deleted=[(2,)])

    def test_tuple_variables(self):
        assert [v.name for v in tuple_variables(1)] == ["X"]
        assert [v.name for v in tuple_variables(3)] == ["X1", "X2", "X3"]


class TestDeltaProperties:
    """Algebraic properties over small relations."""

    @given(old=unary, new=unary)
    def test_diff_then_apply(self, old, new):
        assert apply_delta(old, diff(old, new)) == new

    @given(base=unary, inserted=unary, deleted=unary)
    def test_normalize_keeps_meaning(self, base, inserted, deleted):
        delta = Delta(inserted=inserted, deleted=deleted - inserted)

        normalized = normalize_delta(base, delta)

        assert apply_delta(base, normalized) == apply_delta(base, delta)
        assert not (normalized.inserted & base)
        assert normalized.deleted <= base

    @given(current=unary, plus=unary, minus=unary, plus_s=unary, minus_s=unary)
    def test_rules_agree_with_split(self, current, plus, minus, plus_s, minus_s):
        """The Datalog rendering computes the same view state and split."""
        minus = minus - plus
        program = plusminus_program(P("s"), P("v"), 1)
        instance = {
            P("v_cur"): current,
            P("+v"): plus,
            P("-v"): minus,
            P("+s"): plus_s,
            P("-s"): minus_s,
        }

        out = evaluate(program, instance)

        view_delta = Delta(inserted=plus, deleted=minus)
        split = undef_split(view_delta, plus_s | minus_s)
        assert out[P("v")] == apply_delta(current, view_delta)
        assert out[P("+v_ud")] == split.inserted
        assert out[P("-v_ud")] == split.deleted
