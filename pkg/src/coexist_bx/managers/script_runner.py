"""Replays ``.cosx`` simulation scripts against a ``VersionRegistry``.

One command per line, ``#`` starts a comment line::

    register ver2
    view ver2.v1 spec selection.dl
    insert ver2.v1 (p5, 3)
    expect ver2.v1 {(p5, 3)}
    expect v1_ud {(p5, 3)}
    dump

Bare identifiers in rows are strings; ``expect`` also accepts a physical
relation name.
"""

from __future__ import annotations

import difflib
import logging
from pathlib import Path
from typing import Optional

import lark
from lark import Transformer, v_args
from pydantic import BaseModel, Field

from ..config import CoexistConfig
from ..errors import ScriptSyntaxError
from ..models.bx import DerivedBx
from ..models.relation import Delta, Relation, RelationField, Row, format_row, sorted_rows
from ..models.runtime import PropagationRecord, ViewRef
from .derivation_manager import DerivationManager
from .version_registry import VersionRegistry

logger = logging.getLogger(__name__)

ROWS_GRAMMAR = r"""
    relation: "{" [row ("," row)*] "}"
    rows: row (","? row)*
    row: "(" [value ("," value)*] ")"

    ?value: SIGNED_INT     -> integer
          | ESCAPED_STRING -> string
          | NAME           -> name

    %import common.SIGNED_INT
    %import common.ESCAPED_STRING
    %import common.CNAME -> NAME
    %import common.WS
    %ignore WS
"""

_rows_parser = lark.Lark(ROWS_GRAMMAR, start=["relation", "rows"], parser="lalr")


@v_args(inline=True)
class _RowBuilder(Transformer):
    def integer(self, token: lark.Token) -> int:
        return int(token)

    def string(self, token: lark.Token) -> str:
        return str(token)[1:-1].replace('\\"', '"').replace("\\\\", "\\")

    def name(self, token: lark.Token) -> str:
        return str(token)

    def row(self, *values: object) -> Row:
        return tuple(v for v in values if v is not None)

    def rows(self, *rows: Row) -> list[Row]:
        return list(rows)

    def relation(self, *rows: Optional[Row]) -> Relation:
        return frozenset(r for r in rows if r is not None)


def parse_rows(text: str, line: int, start: str = "rows") -> object:
    try:
        return _RowBuilder().transform(_rows_parser.parse(text, start=start))
    except lark.exceptions.LarkError as e:
        raise ScriptSyntaxError(f"cannot parse {text!r}: {str(e).splitlines()[0]}", line) from e


class ExpectationFailure(BaseModel):
    """An ``expect`` line whose relation differed."""

    line: int
    target: str
    expected: RelationField
    actual: RelationField
    diff: str = Field(..., description="Unified diff, expected to actual")


class ScriptResult(BaseModel):
    """Everything a replay produced, in order."""

    output: list[str] = Field(default_factory=list, description="Dumps and failure diffs")
    records: list[PropagationRecord] = Field(default_factory=list)
    failures: list[ExpectationFailure] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def relation_diff(expected: Relation, actual: Relation, target: str) -> str:
    lines = difflib.unified_diff(
        [format_row(r) for r in sorted_rows(expected)],
        [format_row(r) for r in sorted_rows(actual)],
        fromfile=f"expected {target}",
        tofile=f"actual {target}",
        lineterm="",
    )
    return "\n".join(lines)


class ScriptRunner:
    """Executes simulation scripts line by line."""

    def __init__(
        self,
        config: CoexistConfig,
        registry: Optional[VersionRegistry] = None,
        deriver: Optional[DerivationManager] = None,
        verify: bool = False,
    ):
        self.config = config
        self.registry = registry or VersionRegistry(config)
        self.deriver = deriver or DerivationManager(config)
        self.verify = verify
        self._specs: dict[Path, DerivedBx] = {}

    def run_file(self, path: Path) -> ScriptResult:
        path = Path(path)
        return self.run(path.read_text(encoding="utf-8"), base_dir=path.parent)

    def run(self, text: str, base_dir: Optional[Path] = None) -> ScriptResult:
        """Replay ``text``; stops at the first error, keeps going past failed expectations."""
        base_dir = base_dir or Path.cwd()
        result = ScriptResult()
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            command, _, rest = line.partition(" ")
            rest = rest.strip()
            handler = getattr(self, f"_cmd_{command}", None)
            if handler is None:
                raise ScriptSyntaxError(f"unknown command {command!r}", number)
            logger.debug("line %d: %s", number, line)
            handler(rest, number, base_dir, result)
        return result

    # Commands --------------------------------------------------------------

    @staticmethod
    def _ref(text: str, line: int) -> ViewRef:
        try:
            return ViewRef.parse(text)
        except ValueError as e:
            raise ScriptSyntaxError(str(e).splitlines()[0], line) from e

    def _cmd_register(self, rest: str, line: int, base_dir: Path, result: ScriptResult) -> None:
        if not rest or " " in rest:
            raise ScriptSyntaxError("usage: register <version>", line)
        self.registry.register_version(rest)

    def _cmd_view(self, rest: str, line: int, base_dir: Path, result: ScriptResult) -> None:
        parts = rest.split()
        if len(parts) != 3 or parts[1] != "spec":
            raise ScriptSyntaxError("usage: view <version>.<name> spec <file.dl>", line)
        ref = self._ref(parts[0], line)
        path = (base_dir / parts[2]).resolve()
        if path not in self._specs:
            spec = self.deriver.load_spec(path)
            self._specs[path] = self.deriver.derive_all(spec, verify=self.verify)
        self.registry.add_view(ref.version, ref.view, self._specs[path], origin=str(parts[2]))

    def _update(self, rest: str, line: int, inserting: bool, result: ScriptResult) -> None:
        ref_text, _, rows_text = rest.partition(" ")
        ref = self._ref(ref_text, line)
        rows = parse_rows(rows_text, line)
        delta = Delta.of(inserted=rows) if inserting else Delta.of(deleted=rows)
        record = self.registry.update_view(ref.version, ref.view, delta)
        result.records.append(record)

    def _cmd_insert(self, rest: str, line: int, base_dir: Path, result: ScriptResult) -> None:
        self._update(rest, line, True, result)

    def _cmd_delete(self, rest: str, line: int, base_dir: Path, result: ScriptResult) -> None:
        self._update(rest, line, False, result)

    def _cmd_expect(self, rest: str, line: int, base_dir: Path, result: ScriptResult) -> None:
        target, _, rel_text = rest.partition(" ")
        expected = parse_rows(rel_text, line, start="relation")
        assert isinstance(expected, frozenset)
        if "." in target:
            ref = self._ref(target, line)
            actual = self.registry.query_view(ref.version, ref.view)
        else:
            physical = self.registry.physical
            if target not in physical:
                raise ScriptSyntaxError(f"no physical relation {target}", line)
            actual = physical[target]
        if actual == expected:
            return
        diff = relation_diff(expected, actual, target)
        logger.warning("line %d: expectation on %s failed", line, target)
        result.failures.append(
            ExpectationFailure(line=line, target=target, expected=expected, actual=actual, diff=diff)
        )
        result.output.append(f"line {line}: expect {target} failed\n{diff}")

    def _cmd_dump(self, rest: str, line: int, base_dir: Path, result: ScriptResult) -> None:
        if rest:
            raise ScriptSyntaxError("dump takes no arguments", line)
        result.output.append(self.registry.snapshot())

