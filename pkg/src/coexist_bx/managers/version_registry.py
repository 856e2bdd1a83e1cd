"""In-memory multi-schema-version store.

One physical instance holds the source relations and every view's auxiliary
relation. Schema versions expose views computed by get'; an update on any view
runs putdelta and undef, and the store changes only if the updated view then
shows exactly the requested state.
"""

from __future__ import annotations

import logging
import threading
from typing import Iterable, Mapping, Optional

from ..config import CoexistConfig
from ..datalog import evaluate
from ..delta import apply_delta, normalize_delta, undef_split
from ..errors import (
    ArityMismatchError,
    AuxOwnershipError,
    DuplicateVersionError,
    PropagationFault,
    RegistryError,
    UnknownVersionError,
    UnknownViewError,
)
from ..models.bx import DerivedBx
from ..models.datalog import PredicateRef
from ..models.relation import (
    EMPTY,
    Delta,
    Relation,
    check_same_arity,
    format_row,
    sorted_rows,
)
from ..models.runtime import (
    VERSION_RE,
    PropagationRecord,
    RegisteredView,
    ViewRef,
    ViewSnapshot,
)

logger = logging.getLogger(__name__)

Physical = dict[PredicateRef, Relation]


class VersionRegistry:
    """Schema versions over one physical instance; updates are serialized."""

    def __init__(self, config: CoexistConfig):
        self.config = config
        self._lock = threading.RLock()
        self._physical: Physical = {}
        self._arity: dict[PredicateRef, int] = {}
        self._versions: dict[str, dict[str, RegisteredView]] = {}
        self._aux_owner: dict[PredicateRef, ViewRef] = {}

    # Registration ----------------------------------------------------------

    def register_version(
        self,
        version: str,
        views: Optional[Mapping[str, DerivedBx]] = None,
    ) -> None:
        """Add a schema version, optionally with views; all-or-nothing."""
        with self._lock:
            if version in self._versions:
                raise DuplicateVersionError(f"version {version} already registered")
            if not VERSION_RE.match(version):
                raise RegistryError(f"invalid version id {version!r}")
            self._versions[version] = {}
            try:
                for name, derived in (views or {}).items():
                    self.add_view(version, name, derived)
            except RegistryError:
                self._drop_version(version)
                raise
            logger.info("Registered version %s with %d views", version, len(views or {}))

    def _drop_version(self, version: str) -> None:
        for view in self._versions.pop(version, {}).values():
            self._aux_owner.pop(view.aux, None)
            self._physical.pop(view.aux, None)

    def add_view(
        self, version: str, name: str, derived: DerivedBx, origin: Optional[str] = None
    ) -> RegisteredView:
        """Expose view ``name`` of ``derived`` in ``version``."""
        with self._lock:
            views = self._version(version)
            ref = ViewRef(version=version, view=name)
            if name in views:
                raise RegistryError(f"view {ref} already registered")
            predicate = ref.predicate
            if predicate not in derived.views:
                raise UnknownViewError(
                    f"{name} is not a view of the given spec (views: {[str(v) for v in derived.views]})"
                )
            aux = predicate.undef_aux()
            if aux in self._aux_owner:
                raise AuxOwnershipError(f"{aux} is already written by {self._aux_owner[aux]}")

            physical = [*derived.spec.sources, *(d for d in derived.aux if d.predicate == aux)]
            for decl in physical:
                known = self._arity.get(decl.predicate)
                if known is not None and known != decl.arity:
                    raise ArityMismatchError(
                        f"{decl.predicate} has arity {known} in the store, {decl.arity} in the spec"
                    )
            for decl in physical:
                self._arity[decl.predicate] = decl.arity
                self._physical.setdefault(decl.predicate, EMPTY)

            registered = RegisteredView(ref=ref, derived=derived, origin=origin)
            views[name] = registered
            self._aux_owner[aux] = ref
            logger.info("Added view %s (aux %s)", ref, aux)
            return registered

    # Lookups ---------------------------------------------------------------

    def _version(self, version: str) -> dict[str, RegisteredView]:
        try:
            return self._versions[version]
        except KeyError:
            raise UnknownVersionError(f"unknown version {version}")

    def view(self, version: str, name: str) -> RegisteredView:
        with self._lock:
            views = self._version(version)
            try:
                return views[name]
            except KeyError:
                raise UnknownViewError(f"unknown view {version}.{name}")

    @property
    def versions(self) -> list[str]:
        with self._lock:
            return list(self._versions)

    def registered_views(self) -> list[RegisteredView]:
        with self._lock:
            return [v for views in self._versions.values() for v in views.values()]

    @property
    def physical(self) -> dict[str, Relation]:
        """Copy of the physical instance keyed by relation name."""
        with self._lock:
            return {str(p): rel for p, rel in self._physical.items()}

    def load(self, relation: str, rows: Iterable[tuple]) -> None:
        """Seed a physical relation directly."""
        pred = PredicateRef.parse(relation)
        with self._lock:
            if pred not in self._physical:
                raise UnknownViewError(f"no physical relation {relation}")
            rel = frozenset(tuple(r) for r in rows)
            if check_same_arity(rel) not in (None, self._arity[pred]):
                raise ArityMismatchError(f"rows do not match arity {self._arity[pred]} of {relation}")
            self._physical[pred] = rel

    # Queries ---------------------------------------------------------------

    @staticmethod
    def _compute(view: RegisteredView, physical: Physical) -> Relation:
        program = view.derived.get_prime_for(view.predicate)
        return evaluate(program, physical)[view.predicate]

    def query_view(self, version: str, name: str) -> Relation:
        """Current contents of ``version.name``; waits for a running update."""
        with self._lock:
            registered = self.view(version, name)
            return self._compute(registered, self._physical)

    def _all_views(self, physical: Physical) -> dict[ViewRef, Relation]:
        with self._lock:
            return {v.ref: self._compute(v, physical) for v in self.registered_views()}

    # Updates ---------------------------------------------------------------

    def update_view(self, version: str, name: str, delta: Delta) -> PropagationRecord:
        """Propagate ``delta`` on ``version.name`` to the physical instance."""
        with self._lock:
            registered = self.view(version, name)
            view = registered.predicate
            derived = registered.derived
            arity = self._arity[view.undef_aux()]
            if check_same_arity(delta.inserted, delta.deleted) not in (None, arity):
                raise ArityMismatchError(f"delta arity does not match {registered.ref} (arity {arity})")

            before = self._all_views(self._physical)
            current = before[registered.ref]
            view_delta = normalize_delta(current, delta)
            target = apply_delta(current, view_delta)

            putdelta = derived.putdelta_for(view)
            state = {**self._physical, view: target}
            out = evaluate(putdelta, state)
            undef = derived.undef_for(view)
            aux_out = evaluate(undef, state) if not undef.is_empty else {}

            source_delta: dict[str, Delta] = {}
            for decl in derived.spec.sources:
                pred = decl.predicate
                raw = Delta.of(out.get(pred.inserted(), EMPTY), out.get(pred.deleted(), EMPTY))
                source_delta[str(pred)] = normalize_delta(self._physical[pred], raw)
            aux = view.undef_aux()
            raw_aux = Delta.of(aux_out.get(aux.inserted(), EMPTY), aux_out.get(aux.deleted(), EMPTY))
            aux_delta = normalize_delta(self._physical[aux], raw_aux)

            updated = dict(self._physical)
            for relation, d in source_delta.items():
                pred = PredicateRef.parse(relation)
                updated[pred] = apply_delta(updated[pred], d)
            updated[aux] = apply_delta(updated[aux], aux_delta)

            after = self._all_views(updated)
            record = PropagationRecord(
                ref=registered.ref,
                view_delta=view_delta,
                source_delta=source_delta,
                aux_delta={str(aux): aux_delta},
                snapshots=tuple(
                    ViewSnapshot(ref=ref, before=before[ref], after=after[ref]) for ref in before
                ),
            )
            self._self_check(record, registered, target, after[registered.ref], view_delta, source_delta, aux_delta)

            self._physical = updated
            logger.info(
                "Propagated %s: %d views changed", registered.ref, len(record.changed_views())
            )
            logger.debug("%s", record.render())
            return record

    @staticmethod
    def _self_check(
        record: PropagationRecord,
        registered: RegisteredView,
        target: Relation,
        observed: Relation,
        view_delta: Delta,
        source_delta: Mapping[str, Delta],
        aux_delta: Delta,
    ) -> None:
        if observed != target:
            logger.error("Propagation fault on %s; store unchanged", registered.ref)
            raise PropagationFault(
                f"{registered.ref} shows {sorted_rows(observed)} instead of {sorted_rows(target)}",
                record,
            )
        guard = registered.derived.guard_for(registered.predicate)
        source = str(guard.source)
        reached = source_delta[source].touched if source in source_delta else EMPTY
        expected = undef_split(view_delta, reached)
        if expected != aux_delta:
            logger.error("Auxiliary delta mismatch on %s; store unchanged", registered.ref)
            raise PropagationFault(
                f"auxiliary delta {aux_delta} for {registered.ref} differs from the unsynchronized part {expected}",
                record,
            )

    # Rendering -------------------------------------------------------------

    def snapshot(self) -> str:
        """Physical relations, then every view of every version, sorted."""
        with self._lock:
            blocks: list[str] = []
            for pred in sorted(self._physical, key=str):
                blocks.append(self._block(str(pred), self._physical[pred]))
            for version, views in self._versions.items():
                for name, registered in views.items():
                    rel = self._compute(registered, self._physical)
                    blocks.append(self._block(f"{version}.{name}", rel))
            return "\n".join(blocks)

    @staticmethod
    def _block(title: str, rel: Relation) -> str:
        lines = [f"[{title}]"]
        lines.extend(f"  {format_row(row)}" for row in sorted_rows(rel))
        return "\n".join(lines)
