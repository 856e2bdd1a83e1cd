"""Bounded brute-force checks of GetPut, PutGet, totality and range membership.

A check enumerates cases (source instance, target view state) over a finite
``Universe``, stops at the first failure and greedily shrinks it into a small
counterexample. Cases are indexed in mixed radix so sampled mode draws a
subset of exactly the cases exhaustive mode would visit.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from ..config import CoexistConfig
from ..datalog import compile_program
from ..models.bx import DerivedBx
from ..models.datalog import Flavor, PredicateRef, Program
from ..models.relation import EMPTY, Relation, row_sort_key, sorted_rows
from ..models.verification import (
    Counterexample,
    Law,
    Outcome,
    Universe,
    VerificationReport,
)

logger = logging.getLogger(__name__)

State = dict[PredicateRef, Relation]
CaseCheck = Callable[[State, State], Optional[Counterexample]]


def _named(state: Mapping[PredicateRef, Relation]) -> dict[str, Relation]:
    return {str(pred): rel for pred, rel in state.items()}


def _state_key(state: Mapping[PredicateRef, Relation]) -> tuple:
    return tuple(
        (str(pred), tuple(row_sort_key(r) for r in sorted_rows(state[pred])))
        for pred in sorted(state, key=str)
    )


def _decode(index: int, sizes: Sequence[int]) -> list[int]:
    digits: list[int] = []
    for size in reversed(sizes):
        index, digit = divmod(index, size)
        digits.append(digit)
    digits.reverse()
    return digits


class _CaseSpace:
    """Source instances times targets; fixed relations ride along unchanged."""

    def __init__(
        self,
        axes: list[tuple[PredicateRef, list[Relation]]],
        targets: list[State],
        fixed: Mapping[PredicateRef, Relation],
    ):
        self.axes = axes
        self.targets = targets
        self.fixed = dict(fixed)
        self.sizes = [len(rels) for _, rels in axes] + [len(targets)]

    def __len__(self) -> int:
        return math.prod(self.sizes)

    def case(self, index: int) -> tuple[State, State]:
        *digits, target = _decode(index, self.sizes)
        source = dict(self.fixed)
        for (pred, relations), digit in zip(self.axes, digits):
            source[pred] = relations[digit]
        return source, self.targets[target]


def _shrinks(source: State, target: State) -> Iterable[tuple[State, State]]:
    for pred in sorted(source, key=str):
        for row in sorted_rows(source[pred]):
            yield {**source, pred: source[pred] - {row}}, target
    for pred in sorted(target, key=str):
        for row in sorted_rows(target[pred]):
            yield source, {**target, pred: target[pred] - {row}}


def minimize(
    check: CaseCheck,
    source: State,
    target: State,
    target_ok: Callable[[State], bool] = lambda _t: True,
) -> Counterexample:
    """Remove tuples one at a time while the case keeps failing."""
    found = check(source, target)
    if found is None:
        raise ValueError("cannot minimize a passing case")
    progress = True
    while progress:
        progress = False
        for smaller_source, smaller_target in _shrinks(source, target):
            if smaller_target is not target and not target_ok(smaller_target):
                continue
            result = check(smaller_source, smaller_target)
            if result is not None:
                source, target, found = smaller_source, smaller_target, result
                progress = True
                break
    return found


class LawCases:
    """Per-case checks for one (get, put) pair.

    ``get`` defines the views from the source relations it reads; ``put``
    reads sources and views and defines delta relations ``+r``/``-r``.
    """

    def __init__(self, get: Program, put: Program):
        self.get_program = get
        self.put_program = put
        self.get = compile_program(get)
        self.put = compile_program(put)
        self.views = get.defined_predicates()
        self.delta_heads = sorted((p for p in self.put.defined if p.is_delta), key=str)

    def views_of(self, source: Mapping[PredicateRef, Relation]) -> State:
        out = self.get.run(source)
        return {view: out[view] for view in self.views}

    def _current(self, source: State, target: State) -> list[Relation]:
        views = self.views_of(source)
        return [views.get(view, EMPTY) for view in target]

    def deltas(self, state: Mapping[PredicateRef, Relation]) -> State:
        out = self.put.run(state)
        return {pred: out[pred] for pred in self.delta_heads}

    @staticmethod
    def apply(source: Mapping[PredicateRef, Relation], deltas: Mapping[PredicateRef, Relation]) -> State:
        updated = dict(source)
        for pred, rel in source.items():
            inserted = deltas.get(pred.inserted(), EMPTY)
            deleted = deltas.get(pred.deleted(), EMPTY)
            updated[pred] = (rel - deleted) | inserted
        return updated

    def propagate(self, source: State, target: State) -> tuple[State, State, State]:
        """Run put with ``target`` overriding the current views.

        Returns (deltas, updated source, recomputed views).
        """
        state = {**source, **self.views_of(source), **target}
        deltas = self.deltas(state)
        updated = self.apply(source, deltas)
        return deltas, updated, self.views_of(updated)

    def effective(
        self, source: Mapping[PredicateRef, Relation], deltas: Mapping[PredicateRef, Relation]
    ) -> State:
        """The part of ``deltas`` that would change ``source``; empty relations dropped."""
        changed: State = {}
        for pred in self.delta_heads:
            base = source.get(pred.relation, EMPTY)
            if pred.flavor == Flavor.DELTA_INSERT:
                rows = deltas[pred] - base
            else:
                rows = (deltas[pred] & base) - deltas.get(pred.relation.inserted(), EMPTY)
            if rows:
                changed[pred] = rows
        return changed

    def getput(self, source: State, _target: State) -> Optional[Counterexample]:
        views = self.views_of(source)
        produced = self.effective(source, self.deltas({**source, **views}))
        if not produced:
            return None
        return Counterexample(
            source=_named(source),
            target=_named(views),
            observed=_named(produced),
            expected={str(p): EMPTY for p in produced},
        )

    def putget(self, source: State, target: State) -> Optional[Counterexample]:
        """get(put(s, v')) = v'; a target equal to get(s) must also leave s alone."""
        current = self._current(source, target)
        if all(rel == now for rel, now in zip(target.values(), current)):
            return self.getput(source, target)
        _deltas, _updated, recomputed = self.propagate(source, target)
        observed = {view: recomputed[view] for view in target}
        if observed == target:
            return None
        return Counterexample(
            source=_named(source),
            target=_named(target),
            observed=_named(observed),
            expected=_named(target),
        )

    def defined_on(self, source: State, target: State) -> Optional[Counterexample]:
        """put must not insert and delete the same tuple."""
        deltas, _updated, _views = self.propagate(source, target)
        clashes: State = {}
        for pred in self.delta_heads:
            if pred.flavor != Flavor.DELTA_INSERT:
                continue
            overlap = deltas[pred] & deltas.get(pred.relation.deleted(), EMPTY)
            if overlap:
                clashes[pred] = overlap
                clashes[pred.relation.deleted()] = overlap
        if not clashes:
            return None
        return Counterexample(
            source=_named(source),
            target=_named(target),
            observed=_named(clashes),
            expected={str(p): EMPTY for p in clashes},
        )


def replay(law: Law, get: Program, put: Program, counterexample: Counterexample) -> dict[str, Relation]:
    """Recompute the observed side of ``counterexample``.

    Totality reports carry either a no-change failure (observed deltas) or a
    target-state failure (observed views); the observed keys tell them apart.
    """
    cases = LawCases(get, put)
    source = {PredicateRef.parse(k): v for k, v in counterexample.source.items()}
    target = {PredicateRef.parse(k): v for k, v in counterexample.target.items()}
    if law == Law.GETPUT or (
        counterexample.observed and all(k[:1] in "+-" for k in counterexample.observed)
    ):
        found = cases.getput(source, {})
    elif law == Law.RANGE_MEMBERSHIP:
        found = cases.defined_on(source, target)
    else:
        found = cases.putget(source, target)
    return dict(found.observed) if found is not None else dict(counterexample.expected)


def combine(law: Law, reports: Sequence[VerificationReport]) -> VerificationReport:
    """Fold per-view reports into one: first failure wins, cases add up."""
    cases = sum(r.cases for r in reports)
    notes = tuple(n for r in reports for n in r.notes)
    failed = next((r for r in reports if not r.passed), None)
    return VerificationReport(
        law=law,
        outcome=Outcome.FAIL if failed else Outcome.PASS,
        cases=cases,
        counterexample=failed.counterexample if failed else None,
        notes=notes,
    )


class VerificationManager:
    """Runs law checks over the configured bounds."""

    LAWS = (Law.GETPUT, Law.PUTGET, Law.TOTALITY, Law.RANGE_MEMBERSHIP)

    def __init__(self, config: CoexistConfig):
        self.config = config

    @property
    def universe(self) -> Universe:
        return self.config.verification.universe()

    @property
    def joint_universe(self) -> Universe:
        return self.config.verification.joint_universe()

    # Enumeration -----------------------------------------------------------

    @staticmethod
    def _axes(
        get: Program, universe: Universe, fixed: Mapping[PredicateRef, Relation]
    ) -> list[tuple[PredicateRef, list[Relation]]]:
        arities = get.arities()
        return [
            (pred, universe.relations(arities[pred]))
            for pred in compile_program(get).required
            if pred not in fixed
        ]

    def range_of(
        self,
        get: Program,
        universe: Optional[Universe] = None,
        *,
        focus: Optional[Iterable[PredicateRef]] = None,
        fixed: Optional[Mapping[PredicateRef, Relation]] = None,
    ) -> list[State]:
        """Distinct view states get reaches from sources over ``universe``."""
        universe = universe or self.universe
        fixed = dict(fixed or {})
        cases = LawCases(get, Program())
        views = list(focus) if focus is not None else cases.views
        space = _CaseSpace(self._axes(get, universe, fixed), [{}], fixed)
        images: dict[tuple, State] = {}
        for index in range(len(space)):
            source, _ = space.case(index)
            computed = cases.views_of(source)
            image = {view: computed[view] for view in views}
            images.setdefault(_state_key(image), image)
        return [images[key] for key in sorted(images)]

    def range_member(
        self,
        get: Program,
        view_state: Union[Relation, Mapping[PredicateRef, Relation]],
        universe: Optional[Universe] = None,
    ) -> bool:
        """True iff some source over ``universe`` makes get produce ``view_state``.

        A bare relation is accepted when get defines exactly one view.
        """
        if isinstance(view_state, Mapping):
            target = dict(view_state)
        else:
            views = get.defined_predicates()
            if len(views) != 1:
                raise ValueError(
                    f"get defines {len(views)} views; pass a mapping of view states"
                )
            target = {views[0]: frozenset(view_state)}
        key = _state_key(target)
        return any(_state_key(image) == key for image in self.range_of(get, universe, focus=target))

    # Laws ------------------------------------------------------------------

    def _run(
        self,
        law: Law,
        space: _CaseSpace,
        check: CaseCheck,
        universe: Universe,
        target_ok: Callable[[State], bool] = lambda _t: True,
    ) -> VerificationReport:
        checked = 0
        for index in universe.select(len(space)):
            source, target = space.case(index)
            checked += 1
            if check(source, target) is None:
                continue
            counterexample = minimize(check, source, target, target_ok)
            logger.warning("%s failed after %d cases\n%s", law.value, checked, counterexample.render())
            return VerificationReport(
                law=law, outcome=Outcome.FAIL, cases=checked, counterexample=counterexample
            )
        logger.info("%s passed: %d cases over %s", law.value, checked, universe.describe())
        return VerificationReport(law=law, outcome=Outcome.PASS, cases=checked)

    def check_getput(
        self,
        get: Program,
        put: Program,
        universe: Optional[Universe] = None,
        *,
        fixed: Optional[Mapping[PredicateRef, Relation]] = None,
    ) -> VerificationReport:
        """put(s, get(s)) must leave every source s unchanged."""
        universe = universe or self.universe
        fixed = dict(fixed or {})
        cases = LawCases(get, put)
        space = _CaseSpace(self._axes(get, universe, fixed), [{}], fixed)
        return self._run(Law.GETPUT, space, cases.getput, universe)

    def check_putget(
        self,
        get: Program,
        put: Program,
        universe: Optional[Universe] = None,
        *,
        focus: Optional[Iterable[PredicateRef]] = None,
        fixed: Optional[Mapping[PredicateRef, Relation]] = None,
    ) -> VerificationReport:
        """get(put(s, v')) must equal v' for every s and every v' in range(get).

        ``focus`` limits the updated views; the others stay at get(s).
        """
        universe = universe or self.universe
        fixed = dict(fixed or {})
        cases = LawCases(get, put)
        targets = [
            t
            for t in self.range_of(get, universe, focus=focus, fixed=fixed)
            if all(len(rel) <= universe.max_size for rel in t.values())
        ]
        in_range = {_state_key(t) for t in targets}
        space = _CaseSpace(self._axes(get, universe, fixed), targets, fixed)
        return self._run(
            Law.PUTGET, space, cases.putget, universe, lambda t: _state_key(t) in in_range
        )

    def check_defined_on_range(
        self,
        get: Program,
        put: Program,
        universe: Optional[Universe] = None,
        *,
        focus: Optional[Iterable[PredicateRef]] = None,
        fixed: Optional[Mapping[PredicateRef, Relation]] = None,
    ) -> VerificationReport:
        """put yields consistent deltas for every target in range(get)."""
        universe = universe or self.universe
        fixed = dict(fixed or {})
        cases = LawCases(get, put)
        targets = [
            t
            for t in self.range_of(get, universe, focus=focus, fixed=fixed)
            if all(len(rel) <= universe.max_size for rel in t.values())
        ]
        in_range = {_state_key(t) for t in targets}
        space = _CaseSpace(self._axes(get, universe, fixed), targets, fixed)
        return self._run(
            Law.RANGE_MEMBERSHIP,
            space,
            cases.defined_on,
            universe,
            lambda t: _state_key(t) in in_range,
        )

    def check_bidirectional(
        self,
        get: Program,
        put: Program,
        universe: Optional[Universe] = None,
        *,
        fixed: Optional[Mapping[PredicateRef, Relation]] = None,
    ) -> tuple[VerificationReport, VerificationReport]:
        """GetPut once, PutGet per view with the other views held at get(s)."""
        universe = universe or self.universe
        getput = self.check_getput(get, put, universe, fixed=fixed)
        putget = combine(
            Law.PUTGET,
            [
                self.check_putget(get, put, universe, focus=[view], fixed=fixed)
                for view in get.defined_predicates()
            ],
        )
        return getput, putget

    def check_totality(
        self, derived: DerivedBx, universe: Optional[Universe] = None
    ) -> VerificationReport:
        """putdelta + undef must realize every target state of every view.

        Sources and the view's auxiliary relation are enumerated jointly; the
        other auxiliaries stay empty and the other views at their get' state.
        """
        universe = universe or self.joint_universe
        cases = LawCases(derived.get_prime, derived.total_put)
        arities = derived.get_prime.arities()
        reports: list[VerificationReport] = []
        for view in derived.views:
            aux = view.undef_aux()
            fixed = {d.predicate: EMPTY for d in derived.aux if d.predicate != aux}
            axes = self._axes(derived.get_prime, universe, fixed)

            unchanged = self._run(
                Law.TOTALITY, _CaseSpace(axes, [{}], fixed), cases.getput, universe
            )
            if not unchanged.passed:
                reports.append(
                    unchanged.model_copy(
                        update={"notes": (f"{view}: unchanged view modified the physical state",)}
                    )
                )
                break

            spill = {"cross": 0}

            def check(source: State, target: State, view: PredicateRef = view) -> Optional[Counterexample]:
                found = cases.putget(source, target)
                if found is None and len(cases.views) > 1:
                    before = cases.views_of(source)
                    _d, _u, after = cases.propagate(source, target)
                    if any(before[v] != after[v] for v in cases.views if v != view):
                        spill["cross"] += 1
                return found

            targets = [{view: rel} for rel in universe.relations(arities[view])]
            report = self._run(Law.TOTALITY, _CaseSpace(axes, targets, fixed), check, universe)
            notes = list(report.notes)
            if spill["cross"]:
                notes.append(f"{view}: {spill['cross']} accepted updates also changed other views")
            reports.append(
                report.model_copy(update={"cases": report.cases + unchanged.cases, "notes": tuple(notes)})
            )
            if not report.passed:
                break
        return combine(Law.TOTALITY, reports)

    def verify_derived(
        self,
        derived: DerivedBx,
        universe: Optional[Universe] = None,
        joint_universe: Optional[Universe] = None,
    ) -> list[VerificationReport]:
        """Every law for a derived BX, in report order."""
        universe = universe or self.universe
        getput, putget = self.check_bidirectional(derived.get, derived.putdelta, universe)
        defined = combine(
            Law.RANGE_MEMBERSHIP,
            [
                self.check_defined_on_range(derived.get, derived.putdelta, universe, focus=[view])
                for view in derived.views
            ],
        )
        totality = self.check_totality(derived, joint_universe or self.joint_universe)
        return [getput, putget, totality, defined]
