"""Category-labeled benchmark loading, scoring, and reporting.

A benchmark file is TSV sectioned by category header lines:

    naive
    show me all patients<TAB>SELECT * FROM patient
    ...
    semantic
    ...

The alternative two-file layout (parallel NL and SQL files, one item per
line) is accepted via load_benchmark_two_file. Scoring distinguishes
strict correctness (string equality after canonicalization) from relaxed
correctness (execution comparison).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import MalformedBenchmark, NlsqlError, PipelineError, SqlSyntaxError
from .schema import SchemaBundle
from .sqlexec import execute, relaxed_correct
from .sqlparser import parse

CATEGORIES = (
    "naive",
    "syntactic",
    "lexical",
    "morphological",
    "semantic",
    "missing",
    "mixed",
)


@dataclass(frozen=True)
class BenchItem:
    nl: str
    gold_sql: str
    category: str


@dataclass(frozen=True)
class Benchmark:
    items: tuple[BenchItem, ...]

    def categories(self) -> list[str]:
        seen = {it.category for it in self.items}
        return [c for c in CATEGORIES if c in seen]


def _check_item(nl: str, sql: str, where: str) -> BenchItem | None:
    if not nl or not sql:
        raise MalformedBenchmark(f"{where}: empty NL or SQL field")
    try:
        parse(sql)
    except SqlSyntaxError as exc:
        raise MalformedBenchmark(f"{where}: gold SQL does not parse: {exc}") from None
    return None


def load_benchmark(path: str | Path) -> Benchmark:
    path = Path(path)
    items: list[BenchItem] = []
    category: str | None = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            header = line.strip()
            if header not in CATEGORIES:
                raise MalformedBenchmark(
                    f"{path}:{lineno}: unknown category header {header!r}"
                )
            category = header
            continue
        if category is None:
            raise MalformedBenchmark(f"{path}:{lineno}: item before any category header")
        fields = line.split("\t")
        if len(fields) != 2:
            raise MalformedBenchmark(
                f"{path}:{lineno}: expected 2 tab-separated fields, got {len(fields)}"
            )
        nl, sql = fields[0].strip(), fields[1].strip()
        _check_item(nl, sql, f"{path}:{lineno}")
        items.append(BenchItem(nl, sql, category))
    if not items:
        raise MalformedBenchmark(f"{path}: no benchmark items")
    return Benchmark(items=tuple(items))


def load_benchmark_two_file(
    nl_path: str | Path, sql_path: str | Path, category: str = "mixed"
) -> Benchmark:
    """Parallel-file layout: line i of each file forms one item."""
    if category not in CATEGORIES:
        raise MalformedBenchmark(f"unknown category {category!r}")
    nl_lines = [l for l in Path(nl_path).read_text(encoding="utf-8").splitlines() if l.strip()]
    sql_lines = [l for l in Path(sql_path).read_text(encoding="utf-8").splitlines() if l.strip()]
    if len(nl_lines) != len(sql_lines):
        raise MalformedBenchmark(
            f"line counts differ: {len(nl_lines)} NL vs {len(sql_lines)} SQL"
        )
    if not nl_lines:
        raise MalformedBenchmark("empty benchmark files")
    items = []
    for i, (nl, sql) in enumerate(zip(nl_lines, sql_lines), 1):
        nl, sql = nl.strip(), sql.strip()
        _check_item(nl, sql, f"item {i}")
        items.append(BenchItem(nl, sql, category))
    return Benchmark(items=tuple(items))


# ----------------------------------------------------------------- scoring


@dataclass(frozen=True)
class ItemVerdict:
    item: BenchItem
    final_sql: str | None
    strict: bool
    relaxed: bool
    failure: str | None  # pipeline stage, "execute", or "mismatch"


@dataclass(frozen=True)
class CategoryScore:
    strict: int
    relaxed: int
    total: int

    def strict_acc(self) -> Fraction:
        return Fraction(self.strict, self.total)

    def relaxed_acc(self) -> Fraction:
        return Fraction(self.relaxed, self.total)


@dataclass(frozen=True)
class BenchReport:
    verdicts: tuple[ItemVerdict, ...]
    categories: dict[str, CategoryScore]
    overall: CategoryScore

    def failure_taxonomy(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.verdicts:
            if v.failure:
                out[v.failure] = out.get(v.failure, 0) + 1
        return dict(sorted(out.items()))

    def to_dict(self) -> dict:
        return {
            "overall": {
                "strict": [self.overall.strict, self.overall.total],
                "relaxed": [self.overall.relaxed, self.overall.total],
            },
            "categories": {
                c: {
                    "strict": [s.strict, s.total],
                    "relaxed": [s.relaxed, s.total],
                }
                for c, s in sorted(self.categories.items(), key=lambda kv: CATEGORIES.index(kv[0]))
            },
            "failures": self.failure_taxonomy(),
            "items": [
                {
                    "nl": v.item.nl,
                    "gold": v.item.gold_sql,
                    "category": v.item.category,
                    "final_sql": v.final_sql,
                    "strict": v.strict,
                    "relaxed": v.relaxed,
                    "failure": v.failure,
                }
                for v in self.verdicts
            ],
        }


def run_benchmark(b: Benchmark, pipe) -> BenchReport:
    schema: SchemaBundle = pipe.schema
    verdicts: list[ItemVerdict] = []
    for item in b.items:
        try:
            gold_ast = parse(item.gold_sql)
            gold_result = execute(gold_ast, schema)
        except NlsqlError as exc:
            raise MalformedBenchmark(
                f"gold SQL failed on the target schema: {item.gold_sql!r}: {exc}"
            ) from exc
        gold_canonical = gold_ast.render()

        final_sql = None
        failure = None
        strict = False
        relaxed = False
        try:
            outcome = pipe.answer(item.nl)
            final_sql = outcome.final_sql
        except PipelineError as exc:
            failure = exc.stage
        except NlsqlError:
            failure = "pipeline"
        if final_sql is not None:
            strict = final_sql == gold_canonical
            if strict:
                # identical SQL is correct by identity; no execution needed
                relaxed = True
            else:
                try:
                    predicted = execute(parse(final_sql), schema)
                    relaxed = relaxed_correct(predicted, gold_result)
                    if not relaxed:
                        failure = "mismatch"
                except NlsqlError:
                    failure = "execute"
        verdicts.append(ItemVerdict(item, final_sql, strict, relaxed, failure))

    categories: dict[str, CategoryScore] = {}
    for cat in b.categories():
        sub = [v for v in verdicts if v.item.category == cat]
        categories[cat] = CategoryScore(
            strict=sum(v.strict for v in sub),
            relaxed=sum(v.relaxed for v in sub),
            total=len(sub),
        )
    overall = CategoryScore(
        strict=sum(v.strict for v in verdicts),
        relaxed=sum(v.relaxed for v in verdicts),
        total=len(verdicts),
    )
    return BenchReport(tuple(verdicts), categories, overall)


# --------------------------------------------------------------- rendering


def _pct(score: CategoryScore, relaxed: bool) -> str:
    frac = score.relaxed_acc() if relaxed else score.strict_acc()
    return f"{float(frac) * 100:.1f}"


def render_table(rows: list[tuple[str, BenchReport]], relaxed: bool = True) -> str:
    """One row per labeled report, one column per category plus overall."""
    cats = [c for c in CATEGORIES if any(c in r.categories for _l, r in rows)]
    header = ["system"] + cats + ["overall"]
    body = []
    for label, report in rows:
        cells = [label]
        for c in cats:
            score = report.categories.get(c)
            cells.append(_pct(score, relaxed) if score else "-")
        cells.append(_pct(report.overall, relaxed))
        body.append(cells)
    widths = [
        max(len(row[i]) for row in [header] + body) for i in range(len(header))
    ]
    lines = []
    for row in [header] + body:
        lines.append(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(row)
            )
        )
    return "\n".join(lines) + "\n"


def write_report_json(report: BenchReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
