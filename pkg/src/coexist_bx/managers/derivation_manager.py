"""The four-step derivation: get, putdelta', undef and get'.

Supported putdelta rules are selections: a ``+s``/``-s`` head, exactly one
view literal, at most one literal over the same source and integer
comparisons, all over the head's variables. The comparisons of a view's
``+s`` rule are its guard C.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Sequence

from ..config import CoexistConfig
from ..datalog import parse_program, simplify, unfold
from ..delta import tuple_variables, view_update_rules
from ..errors import (
    DatalogError,
    DerivationError,
    DerivationVerificationError,
    FragmentError,
    GuardExtractionError,
)
from ..models.bx import BxSpec, DerivedBx, ViewGuard
from ..models.datalog import (
    Atom,
    Comparison,
    Declaration,
    Flavor,
    PredicateRef,
    Program,
    RelLiteral,
    Role,
    Rule,
    Term,
    Variable,
)
from ..models.relation import EMPTY
from ..models.verification import Universe, VerificationReport
from .verification_manager import VerificationManager

logger = logging.getLogger(__name__)

DERIVED_FILES = {
    "get": "get.dl",
    "putdelta_prime": "putdelta_prime.dl",
    "undef": "undef.dl",
    "get_prime": "get_prime.dl",
}


def _rename_comparison(cmp: Comparison, mapping: dict[Variable, Term]) -> Comparison:
    def term(t: Term) -> Term:
        return mapping.get(t, t) if isinstance(t, Variable) else t

    return Comparison(left=term(cmp.left), op=cmp.op, right=term(cmp.right), negated=cmp.negated)


def _lit(predicate: PredicateRef, args: tuple[Term, ...], negated: bool = False) -> RelLiteral:
    return RelLiteral(atom=Atom(predicate=predicate, args=args), negated=negated)


def get_rule(guard: ViewGuard) -> Rule:
    """``v(X) :- s(X), C.``"""
    return Rule(
        head=Atom(predicate=guard.view, args=guard.variables),
        body=(_lit(guard.source, guard.variables), *guard.comparisons),
    )


class DerivationManager:
    """Derives the co-existence programs from a putdelta spec file."""

    def __init__(
        self,
        config: CoexistConfig,
        verifier: Optional[VerificationManager] = None,
    ):
        self.config = config
        self.verifier = verifier or VerificationManager(config)

    # Loading ---------------------------------------------------------------

    def parse_spec(self, text: str) -> BxSpec:
        return BxSpec.from_program(parse_program(text))

    def load_spec(self, path: Path) -> BxSpec:
        logger.debug("Loading spec %s", path)
        return self.parse_spec(Path(path).read_text(encoding="utf-8"))

    # Step 1 ----------------------------------------------------------------

    def analyze_fragment(self, spec: BxSpec) -> tuple[ViewGuard, ...]:
        """Check every putdelta rule against the selection fragment.

        Returns one guard per view in declaration order, with variables
        renamed to ``X`` / ``X1..Xn``.
        """
        views = set(spec.view_predicates)
        sources = set(spec.source_predicates)
        by_view: dict[PredicateRef, list[Rule]] = {v: [] for v in spec.view_predicates}

        for rule in spec.putdelta.rules:
            head = rule.head.predicate
            relational = rule.relational()
            foreign = [lit for lit in relational if lit.predicate not in views | sources]
            if foreign:
                raise FragmentError(f"{foreign[0]} reads neither a source nor a view in: {rule}")
            view_lits = [lit for lit in relational if lit.predicate in views]
            source_lits = [lit for lit in relational if lit.predicate in sources]
            if len(view_lits) != 1:
                raise FragmentError(f"expected one view literal, found {len(view_lits)} in: {rule}")
            if len(source_lits) > 1 or any(lit.predicate != head.relation for lit in source_lits):
                raise FragmentError(f"join or cross-source literal in: {rule}")

            args = rule.head.args
            if not all(isinstance(a, Variable) for a in args) or len(set(args)) != len(args):
                raise FragmentError(f"head arguments must be distinct variables in: {rule}")
            for lit in (*view_lits, *source_lits):
                if lit.atom.args != args:
                    raise FragmentError(f"{lit} does not use the head's arguments in: {rule}")
            for cmp in rule.comparisons():
                stray = [v for v in cmp.variables() if v not in args]
                if stray:
                    raise FragmentError(f"comparison {cmp} uses {stray[0]} outside the head in: {rule}")
            by_view[view_lits[0].predicate].append(rule)

        return tuple(self._guard(spec, view, rules) for view, rules in by_view.items())

    def _guard(self, spec: BxSpec, view: PredicateRef, rules: Sequence[Rule]) -> ViewGuard:
        decl = spec.declaration(view)
        assert decl is not None
        xs = tuple_variables(decl.arity)

        if not rules:
            candidates = [d for d in spec.sources if d.arity == decl.arity]
            if len(candidates) != 1:
                raise FragmentError(f"view {view} has no putdelta rule and no unique source")
            logger.warning("View %s has no putdelta rule; assuming identity over %s", view, candidates[0].predicate)
            return ViewGuard(view=view, source=candidates[0].predicate, variables=xs)

        targets = {r.head.predicate.relation for r in rules}
        if len(targets) > 1:
            raise FragmentError(
                f"view {view} updates several sources: {sorted(map(str, targets))}"
            )
        inserts = [r for r in rules if r.head.predicate.flavor == Flavor.DELTA_INSERT]
        deletes = [r for r in rules if r.head.predicate.flavor == Flavor.DELTA_DELETE]
        if len(inserts) > 1 or len(deletes) > 1:
            raise FragmentError(f"view {view} has more than one +s or -s rule")

        def canonical(rule: Rule) -> tuple[Comparison, ...]:
            mapping = {a: x for a, x in zip(rule.head.args, xs) if isinstance(a, Variable)}
            return tuple(_rename_comparison(c, mapping) for c in rule.comparisons())

        chosen = inserts[0] if inserts else deletes[0]
        comparisons = canonical(chosen)
        if inserts and deletes and set(canonical(deletes[0])) != set(comparisons):
            logger.warning(
                "Guards of +%s and -%s rules differ for view %s; verification decides",
                chosen.head.predicate.relation,
                chosen.head.predicate.relation,
                view,
            )
        return ViewGuard(
            view=view,
            source=chosen.head.predicate.relation,
            variables=xs,
            comparisons=comparisons,
        )

    def derive_get(
        self,
        spec: BxSpec,
        bound: Optional[Universe] = None,
        *,
        guards: Optional[tuple[ViewGuard, ...]] = None,
        verify: bool = True,
    ) -> Program:
        """``v(X) :- s(X), C.`` per view, verified with GetPut and PutGet."""
        guards = guards if guards is not None else self.analyze_fragment(spec)
        get = Program(declarations=spec.declarations, rules=tuple(get_rule(g) for g in guards))
        logger.info("Step 1: candidate get with %d rules", len(get.rules))
        if verify:
            for report in self.verifier.check_bidirectional(get, spec.putdelta, bound):
                self._require(report, step=1)
        return get

    # Step 2 ----------------------------------------------------------------

    def derive_putdelta_prime(
        self, spec: BxSpec, *, guards: Optional[tuple[ViewGuard, ...]] = None
    ) -> Program:
        """Unfold every view literal into ``v_cur``, ``+v`` and ``-v``."""
        guards = guards if guards is not None else self.analyze_fragment(spec)
        definitions = Program()
        current = Program()
        for guard in guards:
            arity = len(guard.variables)
            definitions = definitions.merge(view_update_rules(guard.view, arity))
            current = current.merge(
                Program(
                    declarations=(
                        Declaration(predicate=guard.view.current(), arity=arity, role=Role.DERIVED),
                    ),
                    rules=(
                        Rule(
                            head=Atom(predicate=guard.view.current(), args=guard.variables),
                            body=(_lit(guard.source, guard.variables), *guard.comparisons),
                        ),
                    ),
                )
            )
        try:
            unfolded = unfold(spec.putdelta, definitions)
        except DatalogError as e:
            raise DerivationError(str(e), step=2) from e
        result = simplify(unfolded.merge(current))
        logger.info("Step 2: putdelta' has %d rules", len(result.rules))
        return result

    # Step 3 ----------------------------------------------------------------

    @staticmethod
    def guards_from_get(get: Program) -> tuple[ViewGuard, ...]:
        """Read each view's guard back from ``v(X) :- s(X), C.``"""
        guards = []
        for view in get.defined_predicates():
            rules = get.rules_for(view)
            sources = rules[0].relational() if len(rules) == 1 else []
            if len(sources) != 1 or sources[0].negated:
                raise GuardExtractionError(f"get of {view} is not a single selection rule", step=3)
            args = rules[0].head.args
            if not all(isinstance(a, Variable) for a in args):
                raise GuardExtractionError(f"get of {view} has a non-variable head", step=3)
            guards.append(
                ViewGuard(
                    view=view,
                    source=sources[0].predicate,
                    variables=tuple(a for a in args if isinstance(a, Variable)),
                    comparisons=tuple(rules[0].comparisons()),
                )
            )
        return tuple(guards)

    def derive_undef(self, putdelta_prime: Program, get: Program) -> Program:
        """Effective-delta rules routing the unsynchronized residue to ``v_ud``.

        A view tuple reaches the source exactly when C holds, so the residue
        is guarded by ``not C``, one rule per negated comparison.
        """
        rules: list[Rule] = []
        declarations: list[Declaration] = []
        for guard in self.guards_from_get(get):
            view = guard.view
            reads = set()
            for rule in putdelta_prime.rules:
                reads |= rule.body_predicates()
            if view.inserted() not in reads and view.deleted() not in reads:
                raise GuardExtractionError(f"no putdelta' rule reads +{view} or -{view}", step=3)
            if guard.is_trivial:
                continue
            xs = guard.variables
            aux = view.undef_aux()
            negated = [c.negate() for c in guard.comparisons]
            rules.extend(
                Rule(
                    head=Atom(predicate=aux.inserted(), args=xs),
                    body=(_lit(aux, xs, negated=True), _lit(view, xs), c),
                )
                for c in negated
            )
            rules.extend(
                Rule(
                    head=Atom(predicate=aux.deleted(), args=xs),
                    body=(_lit(aux, xs), _lit(view, xs, negated=True), c),
                )
                for c in negated
            )
            decl = get.declaration(view)
            arity = len(xs)
            attributes = decl.attributes if decl is not None else None
            declarations.append(Declaration(predicate=aux, arity=arity, role=Role.SOURCE, attributes=attributes))
            declarations.append(
                decl if decl is not None else Declaration(predicate=view, arity=arity, role=Role.VIEW)
            )
        undef = simplify(Program(declarations=tuple(declarations), rules=tuple(rules)))
        logger.info("Step 3: undef has %d rules", len(undef.rules))
        return undef

    def derive_undef_method_form(self, spec: BxSpec) -> Program:
        """Delta-based presentation: ``+v_ud(X) :- +v(X), not C.``"""
        rules: list[Rule] = []
        for guard in self.analyze_fragment(spec):
            xs = guard.variables
            aux = guard.view.undef_aux()
            for c in guard.comparisons:
                rules.append(
                    Rule(
                        head=Atom(predicate=aux.inserted(), args=xs),
                        body=(_lit(guard.view.inserted(), xs), c.negate()),
                    )
                )
            for c in guard.comparisons:
                rules.append(
                    Rule(
                        head=Atom(predicate=aux.deleted(), args=xs),
                        body=(_lit(guard.view.deleted(), xs), c.negate()),
                    )
                )
        return Program(rules=tuple(rules))

    # Step 4 ----------------------------------------------------------------

    def derive_get_prime(
        self,
        spec: BxSpec,
        undef: Program,
        bound: Optional[Universe] = None,
        *,
        guards: Optional[tuple[ViewGuard, ...]] = None,
        verify: bool = True,
    ) -> Program:
        """get plus ``v(X) :- v_ud(X), not c.`` per comparison c of C.

        Verified per view against putdelta + undef with (source, v_ud) as
        the joint source; other auxiliaries are held empty.
        """
        guards = guards if guards is not None else self.analyze_fragment(spec)
        rules = [get_rule(g) for g in guards]
        aux_decls: list[Declaration] = []
        for guard in guards:
            if guard.is_trivial:
                continue
            aux = guard.view.undef_aux()
            rules.extend(
                Rule(
                    head=Atom(predicate=guard.view, args=guard.variables),
                    body=(_lit(aux, guard.variables), c.negate()),
                )
                for c in guard.comparisons
            )
            decl = spec.declaration(guard.view)
            aux_decls.append(
                Declaration(
                    predicate=aux,
                    arity=len(guard.variables),
                    role=Role.SOURCE,
                    attributes=decl.attributes if decl is not None else None,
                )
            )
        get_prime = Program(
            declarations=(*spec.sources, *aux_decls, *spec.views),
            rules=tuple(rules),
        )
        logger.info("Step 4: get' has %d rules", len(get_prime.rules))
        if verify:
            total = spec.putdelta.merge(undef)
            bound = bound or self.verifier.joint_universe
            for guard in guards:
                own = guard.view.undef_aux()
                fixed = {d.predicate: EMPTY for d in aux_decls if d.predicate != own}
                self._require(self.verifier.check_getput(get_prime, total, bound, fixed=fixed), step=4)
                self._require(
                    self.verifier.check_putget(get_prime, total, bound, focus=[guard.view], fixed=fixed),
                    step=4,
                )
        return get_prime

    # Pipeline --------------------------------------------------------------

    @staticmethod
    def _require(report: VerificationReport, step: int) -> None:
        if not report.passed:
            raise DerivationVerificationError(report, step)

    def aux_declarations(self, spec: BxSpec) -> tuple[Declaration, ...]:
        return tuple(
            Declaration(
                predicate=d.predicate.undef_aux(),
                arity=d.arity,
                role=Role.SOURCE,
                attributes=d.attributes,
            )
            for d in spec.views
        )

    def derive_all(
        self,
        spec: BxSpec,
        bound: Optional[Universe] = None,
        joint_bound: Optional[Universe] = None,
        *,
        verify: bool = True,
    ) -> DerivedBx:
        """Run all four steps; the first failing step aborts the derivation."""
        guards = self.analyze_fragment(spec)
        get = self.derive_get(spec, bound, guards=guards, verify=verify)
        putdelta_prime = self.derive_putdelta_prime(spec, guards=guards)
        undef = self.derive_undef(putdelta_prime, get)
        get_prime = self.derive_get_prime(spec, undef, joint_bound, guards=guards, verify=verify)
        return DerivedBx(
            spec=spec,
            get=get,
            putdelta_prime=putdelta_prime,
            undef=undef,
            get_prime=get_prime,
            aux=self.aux_declarations(spec),
            guards=guards,
        )

    # Files -----------------------------------------------------------------

    def write_derived(self, derived: DerivedBx, out_dir: Path) -> list[Path]:
        """Write the four programs in canonical form."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for field, name in DERIVED_FILES.items():
            path = out_dir / name
            path.write_text(str(getattr(derived, field)), encoding="utf-8", newline="\n")
            written.append(path)
        logger.info("Wrote %d derived programs to %s", len(written), out_dir)
        return written

    def load_derived(self, spec: BxSpec, directory: Path) -> DerivedBx:
        """Rebuild a DerivedBx from previously written programs."""
        directory = Path(directory)
        programs = {}
        for field, name in DERIVED_FILES.items():
            path = directory / name
            if field == "putdelta_prime" and not path.exists():
                programs[field] = self.derive_putdelta_prime(spec)
                continue
            programs[field] = parse_program(path.read_text(encoding="utf-8"))
        return DerivedBx(
            spec=spec,
            aux=self.aux_declarations(spec),
            guards=self.guards_from_get(programs["get"]),
            **programs,
        )
