"""Unit tests for DerivationManager."""

import pytest

from coexist_bx.datalog import evaluate, parse_program
from coexist_bx.errors import (
    DerivationVerificationError,
    FragmentError,
    GuardExtractionError,
)
from coexist_bx.models.datalog import PredicateRef, Program
from coexist_bx.models.relation import instance_from, relation
from coexist_bx.models.verification import Law

P = PredicateRef.parse


def _rules(program):
    return [str(r) for r in program.rules]


class TestFragment:
    """Test cases for analyze_fragment."""

    def test_selection_guard(self, deriver, selection_spec):
        (guard,) = deriver.analyze_fragment(selection_spec)

        assert str(guard.view) == "v1"
        assert str(guard.source) == "s"
        assert [str(c) for c in guard.comparisons] == ["4 < X"]

    def test_identity_guard_is_trivial(self, deriver, identity_spec):
        (guard,) = deriver.analyze_fragment(identity_spec)
        assert guard.is_trivial

    def test_variables_canonicalized(self, deriver):
        spec = deriver.parse_spec(
            "source s(pk, x).\nview v1(pk, x).\n"
            "+s(K, Y) :- v1(K, Y), not s(K, Y), 4 < Y.\n"
            "-s(A, B) :- not v1(A, B), s(A, B), 4 < B."
        )

        (guard,) = deriver.analyze_fragment(spec)

        assert [v.name for v in guard.variables] == ["X1", "X2"]
        assert [str(c) for c in guard.comparisons] == ["4 < X2"]

    def test_join_rejected(self, deriver, data_dir):
        spec = deriver.load_spec(data_dir / "join.dl")
        with pytest.raises(FragmentError) as exc:
            deriver.analyze_fragment(spec)
        assert exc.value.step == 1
        assert "fragment violation" in str(exc.value)

    def test_two_view_literals_rejected(self, deriver):
        spec = deriver.parse_spec(
            "source s(x).\nview v1(x).\nview v2(x).\n+s(X) :- v1(X), v2(X), not s(X)."
        )
        with pytest.raises(FragmentError, match="one view literal"):
            deriver.analyze_fragment(spec)

    def test_comparison_outside_head(self, deriver):
        spec = deriver.parse_spec(
            "source s(x, y).\nview v1(x).\n+s(X, Y) :- v1(X), s(X, Y), 4 < Y."
        )
        with pytest.raises(FragmentError):
            deriver.analyze_fragment(spec)

    def test_view_without_rules_defaults_to_identity(self, deriver):
        spec = deriver.parse_spec("source s(x).\nview v(x).")
        (guard,) = deriver.analyze_fragment(spec)
        assert str(guard.source) == "s"
        assert guard.is_trivial

    def test_view_without_rules_and_no_source(self, deriver):
        spec = deriver.parse_spec("source s(x, y).\nview v(x).")
        with pytest.raises(FragmentError, match="no unique source"):
            deriver.analyze_fragment(spec)


class TestSteps:
    """Test cases for the four derivation steps."""

    def test_step1_get(self, deriver, selection_spec):
        get = deriver.derive_get(selection_spec)
        assert _rules(get) == ["v1(X) :- s(X), 4 < X."]

    def test_step1_identity(self, deriver, identity_spec):
        get = deriver.derive_get(identity_spec)
        assert _rules(get) == ["v(X) :- s(X)."]

    def test_step1_rejects_weakened_delete(self, deriver, data_dir):
        spec = deriver.load_spec(data_dir / "weakened_delete.dl")

        with pytest.raises(DerivationVerificationError) as exc:
            deriver.derive_get(spec)

        assert exc.value.step == 1
        assert exc.value.report.law == Law.GETPUT
        assert exc.value.report.counterexample.source == {"s": relation((0,))}

    def test_step1_rejects_contradictory_guards(self, deriver, data_dir):
        spec = deriver.load_spec(data_dir / "contradictory.dl")

        with pytest.raises(DerivationVerificationError) as exc:
            deriver.derive_get(spec)

        assert exc.value.report.law == Law.PUTGET
        cx = exc.value.report.counterexample
        assert cx.source == {"s": relation((5,))}
        assert cx.target == {"v1": frozenset()}

    def test_step2_putdelta_prime(self, deriver, selection_spec):
        prime = deriver.derive_putdelta_prime(selection_spec)

        assert len(prime.rules) == 5
        assert "v1_cur(X) :- s(X), 4 < X." in _rules(prime)
        for rule in prime.rules:
            assert P("v1") not in rule.body_predicates()

    def test_step2_agrees_with_putdelta(self, deriver, selection_spec):
        """putdelta' on (s, +v, -v) equals putdelta on (s, updated view)."""
        prime = deriver.derive_putdelta_prime(selection_spec)
        s = [(1,), (5,), (8,)]

        direct = evaluate(selection_spec.putdelta, instance_from({"s": s, "v1": [(5,), (6,), (2,)]}))
        via = evaluate(prime, instance_from({"s": s, "+v1": [(6,), (2,)], "-v1": [(8,)]}))

        assert direct[P("+s")] == via[P("+s")] == relation((6,))
        assert direct[P("-s")] == via[P("-s")] == relation((8,))

    def test_step3_undef(self, deriver, selection_spec):
        get = deriver.derive_get(selection_spec, verify=False)
        prime = deriver.derive_putdelta_prime(selection_spec)

        undef = deriver.derive_undef(prime, get)

        assert _rules(undef) == [
            "+v1_ud(X) :- not v1_ud(X), v1(X), not 4 < X.",
            "-v1_ud(X) :- v1_ud(X), not v1(X), not 4 < X.",
        ]

    def test_step3_identity_is_empty(self, deriver, identity_spec):
        get = deriver.derive_get(identity_spec, verify=False)
        undef = deriver.derive_undef(deriver.derive_putdelta_prime(identity_spec), get)
        assert undef.is_empty

    def test_step3_second_view(self, deriver, two_views_spec):
        get = deriver.derive_get(two_views_spec, verify=False)
        undef = deriver.derive_undef(deriver.derive_putdelta_prime(two_views_spec), get)

        assert "+v2_ud(X) :- not v2_ud(X), v2(X), not 7 < X." in _rules(undef)

    def test_step3_requires_delta_reads(self, deriver, selection_spec):
        get = deriver.derive_get(selection_spec, verify=False)
        with pytest.raises(GuardExtractionError) as exc:
            deriver.derive_undef(Program(), get)
        assert exc.value.step == 3

    def test_step3_guard_extraction(self, deriver):
        get = parse_program("v1(X) :- s(X), 4 < X.\nv1(X) :- t(X).")
        with pytest.raises(GuardExtractionError):
            deriver.guards_from_get(get)

    def test_step3_method_form(self, deriver, selection_spec):
        undef = deriver.derive_undef_method_form(selection_spec)
        assert _rules(undef) == [
            "+v1_ud(X) :- +v1(X), not 4 < X.",
            "-v1_ud(X) :- -v1(X), not 4 < X.",
        ]

    def test_step4_get_prime(self, deriver, selection_spec):
        get = deriver.derive_get(selection_spec, verify=False)
        undef = deriver.derive_undef(deriver.derive_putdelta_prime(selection_spec), get)

        get_prime = deriver.derive_get_prime(selection_spec, undef)

        assert _rules(get_prime) == ["v1(X) :- s(X), 4 < X.", "v1(X) :- v1_ud(X), not 4 < X."]
        assert [str(d.predicate) for d in get_prime.declarations] == ["s", "v1_ud", "v1"]

    def test_step4_rejects_missing_undef(self, deriver, selection_spec):
        """Without undef, rows outside 4 < X cannot be stored through the view."""
        with pytest.raises(DerivationVerificationError) as exc:
            deriver.derive_get_prime(selection_spec, Program())
        assert exc.value.step == 4


class TestPipeline:
    """Test cases for derive_all and the derived files."""

    def test_derive_all_verified(self, deriver, selection_spec):
        derived = deriver.derive_all(selection_spec)

        assert [str(v) for v in derived.views] == ["v1"]
        assert [str(d.predicate) for d in derived.aux] == ["v1_ud"]
        assert derived.view_sources() == {P("v1"): P("s")}

    def test_identity_get_prime_equals_get(self, identity_derived):
        assert identity_derived.get_prime.rules == identity_derived.get.rules
        assert identity_derived.undef.is_empty

    def test_two_views_restricted(self, deriver, two_views_spec):
        derived = deriver.derive_all(two_views_spec, verify=False)

        v2 = derived.get_prime_for(P("v2"))

        assert _rules(v2) == ["v2(X) :- s(X), 7 < X.", "v2(X) :- v2_ud(X), not 7 < X."]
        assert [str(d.predicate) for d in v2.declarations] == ["s", "v2_ud", "v2"]
        assert all("v1" not in str(r) for r in derived.undef_for(P("v2")).rules)

    def test_write_and_load(self, deriver, selection_derived, selection_spec, temp_dir):
        written = deriver.write_derived(selection_derived, temp_dir)

        assert sorted(p.name for p in written) == [
            "get.dl",
            "get_prime.dl",
            "putdelta_prime.dl",
            "undef.dl",
        ]
        loaded = deriver.load_derived(selection_spec, temp_dir)
        assert loaded.get_prime == selection_derived.get_prime
        assert loaded.undef == selection_derived.undef
        assert loaded.guards == selection_derived.guards

    def test_load_without_putdelta_prime(self, deriver, selection_derived, selection_spec, temp_dir):
        deriver.write_derived(selection_derived, temp_dir)
        (temp_dir / "putdelta_prime.dl").unlink()

        loaded = deriver.load_derived(selection_spec, temp_dir)

        assert loaded.putdelta_prime == selection_derived.putdelta_prime
