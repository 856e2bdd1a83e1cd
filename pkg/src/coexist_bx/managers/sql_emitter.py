"""Render derived programs as SQL: get' as views, putdelta + undef as triggers."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Optional

from ..config import CoexistConfig
from ..errors import UnsupportedConstructError
from ..models.bx import DerivedBx
from ..models.datalog import (
    Comparison,
    Constant,
    Flavor,
    PredicateRef,
    Program,
    RelLiteral,
    Role,
    Rule,
    Term,
    Variable,
)
from ..models.sql import SqlArtifact, SqlDialect, ViewSql

logger = logging.getLogger(__name__)


def _literal(constant: Constant) -> str:
    if isinstance(constant.value, str):
        return "'" + constant.value.replace("'", "''") + "'"
    return str(constant.value)


class SqlEmitter:
    """Generates CREATE VIEW and INSTEAD OF trigger text."""

    def __init__(self, config: CoexistConfig, dialect: Optional[SqlDialect] = None):
        self.config = config
        self.dialect = dialect or config.sql.dialect
        self.indent = config.sql.indent

    def q(self, identifier: str) -> str:
        return self.dialect.quote(identifier)

    @staticmethod
    def columns(program: Program, predicate: PredicateRef, arity: int) -> tuple[str, ...]:
        decl = program.declaration(predicate)
        if decl is not None:
            return decl.columns()
        return tuple(f"c{i}" for i in range(1, arity + 1))

    def _condition(self, cmp: Comparison, column: Callable[[Variable], str]) -> str:
        def term(t: Term) -> str:
            return column(t) if isinstance(t, Variable) else _literal(t)

        text = f"{term(cmp.left)} {cmp.op.value} {term(cmp.right)}"
        return f"NOT ({text})" if cmp.negated else text

    # Views -----------------------------------------------------------------

    def _select(self, rule: Rule, program: Program) -> str:
        positives = [lit for lit in rule.relational() if not lit.negated]
        if len(positives) != 1:
            raise UnsupportedConstructError(
                f"expected one positive relation, found {len(positives)}", str(rule)
            )
        table = positives[0].atom
        table_name = self.q(str(table.predicate))
        table_cols = self.columns(program, table.predicate, table.arity)

        bound: dict[Variable, str] = {}
        where: list[str] = []
        for arg, col in zip(table.args, table_cols):
            if isinstance(arg, Variable):
                if arg in bound:
                    where.append(f"{self.q(col)} = {self.q(bound[arg])}")
                else:
                    bound[arg] = col
            else:
                where.append(f"{self.q(col)} = {_literal(arg)}")

        select = []
        view_cols = self.columns(program, rule.head.predicate, rule.head.arity)
        for arg, view_col in zip(rule.head.args, view_cols):
            if isinstance(arg, Constant):
                select.append(f"{_literal(arg)} AS {self.q(view_col)}")
            elif bound[arg] == view_col:
                select.append(self.q(view_col))
            else:
                select.append(f"{self.q(bound[arg])} AS {self.q(view_col)}")

        for lit in rule.body:
            if isinstance(lit, Comparison):
                where.append(self._condition(lit, lambda v: self.q(bound[v])))
            elif lit.negated:
                where.append(self._not_exists(lit, program, table_name, bound))

        text = f"SELECT {', '.join(select)} FROM {table_name}"
        if where:
            text += " WHERE " + " AND ".join(where)
        return text

    def _not_exists(
        self, lit: RelLiteral, program: Program, outer: str, bound: dict[Variable, str]
    ) -> str:
        inner = self.q(str(lit.predicate))
        cols = self.columns(program, lit.predicate, lit.atom.arity)
        matches = []
        for arg, col in zip(lit.atom.args, cols):
            value = f"{outer}.{self.q(bound[arg])}" if isinstance(arg, Variable) else _literal(arg)
            matches.append(f"{inner}.{self.q(col)} = {value}")
        condition = " WHERE " + " AND ".join(matches) if matches else ""
        return f"NOT EXISTS (SELECT 1 FROM {inner}{condition})"

    def emit_view(self, get_prime: Program) -> list[str]:
        """One CREATE VIEW per defined view, in declaration order."""
        views = [d.predicate for d in get_prime.declared(Role.VIEW)]
        views += [p for p in get_prime.defined_predicates() if p not in views]
        statements = []
        for view in views:
            rules = get_prime.rules_for(view)
            if not rules:
                continue
            selects = " UNION ".join(self._select(r, get_prime) for r in rules)
            statements.append(f"CREATE VIEW {self.q(str(view))} AS {selects};")
        return statements

    # Triggers --------------------------------------------------------------

    def _insert(self, table: PredicateRef, program: Program, values: list[str], idempotent: bool) -> str:
        cols = self.columns(program, table, len(values))
        name = self.q(str(table))
        col_list = ", ".join(self.q(c) for c in cols)
        if not idempotent:
            return f"INSERT INTO {name} ({col_list}) VALUES ({', '.join(values)});"
        match = " AND ".join(f"{self.q(c)} = {v}" for c, v in zip(cols, values))
        return (
            f"INSERT INTO {name} ({col_list}) SELECT {', '.join(values)} "
            f"WHERE NOT EXISTS (SELECT 1 FROM {name} WHERE {match});"
        )

    def _delete(self, table: PredicateRef, program: Program, values: list[str]) -> str:
        cols = self.columns(program, table, len(values))
        match = " AND ".join(f"{self.q(c)} = {v}" for c, v in zip(cols, values))
        return f"DELETE FROM {self.q(str(table))} WHERE {match};"

    def _branch(
        self, rule: Rule, view_lit: RelLiteral, row: str, program: Program
    ) -> tuple[list[str], str]:
        """Guard conditions and the statement one putdelta/undef rule performs."""
        view_cols = self.columns(program, view_lit.predicate, view_lit.atom.arity)
        column: dict[Variable, str] = {}
        for arg, col in zip(view_lit.atom.args, view_cols):
            if isinstance(arg, Variable):
                column.setdefault(arg, f"{row}.{self.q(col)}")
        values = []
        for arg in rule.head.args:
            if isinstance(arg, Variable):
                values.append(column[arg])
            else:
                values.append(_literal(arg))
        target = rule.head.predicate.relation
        guards = [self._condition(c, lambda v: column[v]) for c in rule.comparisons()]
        if rule.head.predicate.flavor == Flavor.DELTA_INSERT:
            idempotent = any(
                lit.negated and lit.predicate == target for lit in rule.relational()
            )
            return guards, self._insert(target, program, values, idempotent)
        return guards, self._delete(target, program, values)

    def _trigger(
        self,
        view: PredicateRef,
        event: str,
        primary: Optional[tuple[list[str], str]],
        residue: list[tuple[list[str], str]],
    ) -> str:
        name = self.q(f"{view}_{event.lower()}")
        i = self.indent
        body: list[str] = []
        if primary is not None:
            guard, statement = primary
            if not guard:
                body.append(f"{i}{statement}")
            else:
                body.append(f"{i}IF {' AND '.join(guard)} THEN")
                body.append(f"{i}{i}{statement}")
                if residue:
                    body.append(f"{i}ELSE")
                    body.extend(f"{i}{i}{stmt}" for stmt in dict.fromkeys(s for _, s in residue))
                body.append(f"{i}END IF;")
        elif residue:
            condition = " OR ".join(" AND ".join(g) or "TRUE" for g, _ in residue)
            body.append(f"{i}IF {condition} THEN")
            body.extend(f"{i}{i}{stmt}" for stmt in dict.fromkeys(s for _, s in residue))
            body.append(f"{i}END IF;")
        else:
            raise UnsupportedConstructError(f"no rule handles {event.lower()}s on {view}", str(view))
        header = f"CREATE TRIGGER {name} INSTEAD OF {event} ON {self.q(str(view))} FOR EACH ROW"
        return "\n".join([header, "BEGIN", *body, "END;"])

    @staticmethod
    def _view_literal(rule: Rule, views: set[PredicateRef]) -> RelLiteral:
        found = [lit for lit in rule.relational() if lit.predicate in views]
        if len(found) != 1:
            raise UnsupportedConstructError("expected exactly one view literal", str(rule))
        return found[0]

    def emit_triggers(self, putdelta: Program, undef: Program) -> list[str]:
        """INSTEAD OF INSERT and DELETE triggers for every view, in declaration order."""
        program = putdelta.merge(undef)
        views = [d.predicate for d in program.declared(Role.VIEW) if not d.predicate.is_delta]
        statements = []
        for view in views:
            statements.extend(self._view_triggers(view, putdelta, undef, program))
        return statements

    def _view_triggers(
        self, view: PredicateRef, putdelta: Program, undef: Program, program: Program
    ) -> list[str]:
        by_event: dict[str, dict[str, list[tuple[list[str], str]]]] = {
            "INSERT": {"primary": [], "residue": []},
            "DELETE": {"primary": [], "residue": []},
        }
        for kind, source in (("primary", putdelta), ("residue", undef)):
            for rule in source.rules:
                if view not in rule.body_predicates():
                    continue
                lit = self._view_literal(rule, {view})
                event = "INSERT" if not lit.negated else "DELETE"
                expected = Flavor.DELTA_INSERT if event == "INSERT" else Flavor.DELTA_DELETE
                if rule.head.predicate.flavor != expected:
                    raise UnsupportedConstructError(
                        f"{rule.head.predicate} cannot be driven by a {event.lower()} on {view}",
                        str(rule),
                    )
                row = "NEW" if event == "INSERT" else "OLD"
                by_event[event][kind].append(self._branch(rule, lit, row, program))

        triggers = []
        for event, parts in by_event.items():
            if len(parts["primary"]) > 1:
                raise UnsupportedConstructError(
                    f"more than one source rule for {event.lower()}s on {view}", str(view)
                )
            primary = parts["primary"][0] if parts["primary"] else None
            triggers.append(self._trigger(view, event, primary, parts["residue"]))
        return triggers

    def _ddl_template(self, view: PredicateRef, program: Program, arity: int) -> str:
        aux = view.undef_aux()
        cols = ", ".join(self.q(c) for c in self.columns(program, aux, arity))
        return (
            f"-- Auxiliary table for rows of {view} that do not reach the source:\n"
            f"-- CREATE TABLE {self.q(str(aux))} ({cols});"
        )

    # Whole derivation ------------------------------------------------------

    def emit(self, derived: DerivedBx) -> SqlArtifact:
        program = derived.putdelta.merge(derived.undef).merge(derived.get_prime)
        views = []
        for view in derived.views:
            get_prime = derived.get_prime_for(view)
            undef = derived.undef_for(view)
            statement = self.emit_view(get_prime.merge(Program(declarations=program.declarations)))
            decl = program.declaration(view)
            arity = decl.arity if decl is not None else 0
            views.append(
                ViewSql(
                    view=str(view),
                    view_statement=statement[0],
                    trigger_statements=tuple(
                        self._view_triggers(view, derived.putdelta_for(view), undef, program)
                    ),
                    ddl_template=self._ddl_template(view, program, arity) if not undef.is_empty else "",
                )
            )
        logger.info("Rendered SQL for %d views (%s dialect)", len(views), self.dialect.value)
        return SqlArtifact(dialect=self.dialect, views=tuple(views))

    def write(self, artifact: SqlArtifact, out_dir: Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in artifact.files().items():
            path = out_dir / name
            path.write_text(text, encoding="utf-8", newline="\n")
            written.append(path)
        return written
