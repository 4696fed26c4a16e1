"""Schema bundle: table definitions, sample rows, and the foreign-key join graph.

The schema file is JSON; each table may point at a CSV data file whose
header row must match the declared column order. Everything is validated
eagerly at load time and immutable afterwards, so bundles are safe to
share across threads.
"""

from __future__ import annotations

import csv
import json
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DanglingForeignKey,
    DuplicateName,
    MalformedSchema,
    NoJoinPath,
    RowArityMismatch,
)

COLUMN_TYPES = ("integer", "real", "text")

_IDENT_RE = re.compile(r"^[a-z_][a-z0-9_]*$")


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: str  # one of COLUMN_TYPES
    synonyms: tuple[str, ...] = ()
    domain: str | None = None

    @property
    def is_numeric(self) -> bool:
        return self.type in ("integer", "real")

    def surface_form(self) -> str:
        """Primary NL rendering: first synonym, else name with spaces."""
        if self.synonyms:
            return self.synonyms[0]
        return self.name.replace("_", " ")


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnDef, ...]
    pk: str | None = None

    def column(self, name: str) -> ColumnDef:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def surface_form(self) -> str:
        return self.name.replace("_", " ")


# A join predicate is one fk edge: from_table.from_col = to_table.to_col.
@dataclass(frozen=True)
class JoinPredicate:
    from_table: str
    from_column: str
    to_table: str
    to_column: str

    def tables(self) -> tuple[str, str]:
        return (self.from_table, self.to_table)

    def render(self) -> str:
        return (
            f"{self.from_table}.{self.from_column} = "
            f"{self.to_table}.{self.to_column}"
        )


class JoinGraph:
    """Undirected view of the fk edges; node order follows the schema."""

    def __init__(self, tables: list[str], edges: list[JoinPredicate]):
        self.nodes = list(tables)
        self.edges = list(edges)
        self._adj: dict[str, list[tuple[str, JoinPredicate]]] = {t: [] for t in tables}
        for pred in edges:
            self._adj[pred.from_table].append((pred.to_table, pred))
            self._adj[pred.to_table].append((pred.from_table, pred))
        for name in self._adj:
            self._adj[name].sort(key=lambda item: (item[0], item[1].render()))

    def neighbors(self, table: str) -> list[tuple[str, JoinPredicate]]:
        return self._adj[table]


@dataclass
class SchemaBundle:
    tables: tuple[TableDef, ...]
    fk_edges: tuple[JoinPredicate, ...]
    data: dict[str, list[tuple]] = field(default_factory=dict)

    def table(self, name: str) -> TableDef:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def has_table(self, name: str) -> bool:
        return any(t.name == name for t in self.tables)

    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]

    def join_graph(self) -> JoinGraph:
        return JoinGraph(self.table_names(), list(self.fk_edges))

    def column_values(self, table: str, column: str) -> list:
        """Distinct values of one column, in first-seen row order."""
        tdef = self.table(table)
        idx = [c.name for c in tdef.columns].index(column)
        seen = []
        known = set()
        for row in self.data.get(table, []):
            v = row[idx]
            if v not in known:
                known.add(v)
                seen.append(v)
        return seen

    def owners_of_column(self, column: str) -> list[str]:
        """Tables declaring a column with this name, in schema order."""
        return [t.name for t in self.tables if t.has_column(column)]


def _require_ident(raw, what: str) -> str:
    if not isinstance(raw, str) or not raw.strip():
        raise MalformedSchema(f"{what} name missing or empty")
    name = raw.strip().lower()
    if not _IDENT_RE.match(name):
        raise MalformedSchema(f"{what} name {raw!r} is not a valid identifier")
    return name


def _parse_value(raw: str, col: ColumnDef, table: str, line: int):
    if col.type == "text":
        return raw
    raw = raw.strip()
    try:
        if col.type == "integer":
            return int(raw)
        return float(raw)
    except ValueError:
        raise MalformedSchema(
            f"table {table!r} line {line}: value {raw!r} does not parse as {col.type} "
            f"for column {col.name!r}"
        ) from None


def _load_rows(path: Path, table: TableDef) -> list[tuple]:
    if not path.exists():
        raise MalformedSchema(f"data file {path} for table {table.name!r} does not exist")
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedSchema(f"data file {path} is empty") from None
        expected = [c.name for c in table.columns]
        if [h.strip().lower() for h in header] != expected:
            raise MalformedSchema(
                f"data file {path}: header {header} does not match declared columns {expected}"
            )
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(table.columns):
                raise RowArityMismatch(
                    f"table {table.name!r} line {lineno}: got {len(record)} values, "
                    f"expected {len(table.columns)}"
                )
            rows.append(
                tuple(
                    _parse_value(raw, col, table.name, lineno)
                    for raw, col in zip(record, table.columns)
                )
            )
    return rows


def load_schema(path: str | Path) -> SchemaBundle:
    """Load and validate a schema description file (see module docstring).

    Raises MalformedSchema / DuplicateName / DanglingForeignKey /
    RowArityMismatch, each naming the offending element.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedSchema(f"cannot parse schema file {path}: {exc}") from exc

    raw_tables = raw.get("tables")
    if not isinstance(raw_tables, list) or not raw_tables:
        raise MalformedSchema(f"schema file {path} declares no tables")

    tables: list[TableDef] = []
    seen_tables: set[str] = set()
    data_files: dict[str, str | None] = {}
    for spec in raw_tables:
        tname = _require_ident(spec.get("name"), "table")
        if tname in seen_tables:
            raise DuplicateName(f"duplicate table name {tname!r}")
        seen_tables.add(tname)
        raw_cols = spec.get("columns")
        if not isinstance(raw_cols, list) or not raw_cols:
            raise MalformedSchema(f"table {tname!r} declares no columns")
        cols: list[ColumnDef] = []
        seen_cols: set[str] = set()
        for cspec in raw_cols:
            cname = _require_ident(cspec.get("name"), f"column of table {tname!r}")
            if cname in seen_cols:
                raise DuplicateName(f"duplicate column {tname}.{cname}")
            seen_cols.add(cname)
            ctype = cspec.get("type")
            if ctype not in COLUMN_TYPES:
                raise MalformedSchema(
                    f"column {tname}.{cname}: type {ctype!r} not one of {COLUMN_TYPES}"
                )
            synonyms = tuple(str(s) for s in cspec.get("synonyms", []))
            cols.append(
                ColumnDef(
                    name=cname,
                    type=ctype,
                    synonyms=synonyms,
                    domain=cspec.get("domain"),
                )
            )
        pk = spec.get("pk")
        if pk is not None:
            pk = str(pk).strip().lower()
            if pk not in seen_cols:
                raise MalformedSchema(f"table {tname!r}: pk {pk!r} is not a column")
        tables.append(TableDef(name=tname, columns=tuple(cols), pk=pk))
        data_files[tname] = spec.get("data_file")

    by_name = {t.name: t for t in tables}

    def resolve(ref: str) -> tuple[str, str]:
        parts = str(ref).strip().lower().split(".")
        if len(parts) != 2:
            raise MalformedSchema(f"fk reference {ref!r} must look like table.column")
        t, c = parts
        if t not in by_name:
            raise DanglingForeignKey(f"fk reference {ref!r}: unknown table {t!r}")
        if not by_name[t].has_column(c):
            raise DanglingForeignKey(f"fk reference {ref!r}: unknown column {c!r}")
        return t, c

    edges: list[JoinPredicate] = []
    for fk in raw.get("fks", []):
        ft, fc = resolve(fk.get("from"))
        tt, tc = resolve(fk.get("to"))
        a, b = by_name[ft].column(fc), by_name[tt].column(tc)
        compatible = a.type == b.type or (
            a.type in ("integer", "real") and b.type in ("integer", "real")
        )
        if not compatible:
            raise DanglingForeignKey(
                f"fk {ft}.{fc} -> {tt}.{tc}: incompatible types {a.type}/{b.type}"
            )
        edges.append(JoinPredicate(ft, fc, tt, tc))

    data: dict[str, list[tuple]] = {}
    for table in tables:
        rel = data_files.get(table.name)
        if rel is None:
            data[table.name] = []
            continue
        data[table.name] = _load_rows(path.parent / rel, table)

    return SchemaBundle(tables=tuple(tables), fk_edges=tuple(edges), data=data)


def shortest_join_path(
    g: JoinGraph, required: set[str]
) -> list[tuple[str, JoinPredicate | None]]:
    """Connect the required tables with a minimum number of join edges.

    Returns (table, predicate) pairs: the first table carries no
    predicate, every later one joins to some earlier table in the list.
    Two required tables reduce to plain BFS; more are attached greedily,
    nearest-first, with lexicographic tie-breaks (exact Steiner trees are
    overkill at this schema size). Raises NoJoinPath when the required
    tables do not share a connected component.
    """
    if not required:
        raise ValueError("required table set is empty")
    for name in required:
        if name not in g._adj:
            raise ValueError(f"unknown table {name!r}")

    remaining = set(required)
    # Seed with the required table that comes first in schema order.
    seed = next(t for t in g.nodes if t in remaining)
    remaining.discard(seed)
    result: list[tuple[str, JoinPredicate | None]] = [(seed, None)]
    in_tree = {seed}

    while remaining:
        # Multi-source BFS from the current tree.
        parent: dict[str, tuple[str, JoinPredicate]] = {}
        dist = {t: 0 for t in in_tree}
        queue = deque(sorted(in_tree))
        target = None
        target_dist = None
        while queue:
            cur = queue.popleft()
            if target_dist is not None and dist[cur] >= target_dist:
                break
            for nxt, pred in g.neighbors(cur):
                if nxt in dist:
                    continue
                dist[nxt] = dist[cur] + 1
                parent[nxt] = (cur, pred)
                if nxt in remaining:
                    if target_dist is None or dist[nxt] < target_dist or (
                        dist[nxt] == target_dist and nxt < target
                    ):
                        target, target_dist = nxt, dist[nxt]
                queue.append(nxt)
        if target is None:
            raise NoJoinPath(
                f"tables {sorted(remaining)} are not connected to {sorted(in_tree)}"
            )
        # Walk back to the tree, then emit tree-to-target order.
        chain: list[tuple[str, JoinPredicate]] = []
        node = target
        while node not in in_tree:
            prev, pred = parent[node]
            chain.append((node, pred))
            node = prev
        for table, pred in reversed(chain):
            result.append((table, pred))
            in_tree.add(table)
        remaining.discard(target)

    return result
