"""Evaluator for the SQL subset over the in-memory row store.

Multiset semantics throughout; no NULLs exist in the data model. Aggregates
over empty input: COUNT yields 0, every other aggregate yields an empty row
set. AVG is computed as an exact rational. Uncorrelated subqueries are
materialized once per query, not once per row.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import SqlSyntaxError, TypeMismatch, UnboundPlaceholder, UnknownIdentifier
from .schema import SchemaBundle
from .sqlparser import (
    Aggregate,
    And,
    ColumnRef,
    Comparison,
    ExistsPredicate,
    InPredicate,
    Literal,
    Or,
    Select,
    Star,
)

NUMERIC_TOL = 1e-9


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(
                    f"row arity {len(r)} != column count {len(self.columns)}"
                )


def _value_key(v):
    """Canonical sort/group key: exact rational for numbers, text as-is."""
    if isinstance(v, str):
        return (1, v)
    return (0, Fraction(v))


def plain_value(v):
    """Exact Fractions down-converted for display and JSON transport."""
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return int(v)
        return float(v)
    return v


def values_equal(a, b, tol: float = NUMERIC_TOL) -> bool:
    if isinstance(a, str) != isinstance(b, str):
        return False
    if isinstance(a, str):
        return a == b
    return abs(Fraction(a) - Fraction(b)) <= Fraction(str(tol))


def _strict_equal(a, b) -> bool:
    if isinstance(a, str) != isinstance(b, str):
        raise TypeMismatch(f"cannot compare {a!r} with {b!r}")
    if isinstance(a, str):
        return a == b
    return Fraction(a) == Fraction(b)


def _ordered(a, op: str, b) -> bool:
    if isinstance(a, str) != isinstance(b, str):
        raise TypeMismatch(f"cannot compare {a!r} {op} {b!r}")
    if not isinstance(a, str):
        a, b = Fraction(a), Fraction(b)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


class _Resolver:
    """Binds column references of one SELECT scope to (table, column index)."""

    def __init__(self, ast: Select, schema: SchemaBundle):
        self.schema = schema
        self.tables = ast.tables
        for t in ast.tables:
            if not schema.has_table(t):
                raise UnknownIdentifier(f"unknown table {t!r}")

    def resolve(self, ref: ColumnRef) -> tuple[str, int]:
        owners = []
        for t in self.tables:
            tdef = self.schema.table(t)
            if ref.table is not None and ref.table != t:
                continue
            for i, c in enumerate(tdef.columns):
                if c.name == ref.column:
                    owners.append((t, i))
        if not owners:
            raise UnknownIdentifier(f"unknown column {ref.render()!r}")
        if len(owners) > 1:
            raise UnknownIdentifier(f"ambiguous column {ref.render()!r}")
        return owners[0]


def execute(ast: Select, schema: SchemaBundle) -> ResultTable:
    if ast.join_placeholder:
        raise UnboundPlaceholder("@JOIN was not expanded before execution")
    res = _Resolver(ast, schema)
    _validate_items(ast, res)

    envs: list[dict[str, tuple]] = [
        {ast.tables[0]: row} for row in schema.data[ast.tables[0]]
    ]
    for j in ast.joins:
        lt, li = res.resolve(j.left)
        rt, ri = res.resolve(j.right)
        new_envs = []
        for e in envs:
            for row in schema.data[j.table]:
                trial = dict(e)
                trial[j.table] = row
                if lt in trial and rt in trial:
                    if _strict_equal(trial[lt][li], trial[rt][ri]):
                        new_envs.append(trial)
                else:
                    # predicate references a table joined later; keep and
                    # let a later pass filter (template closure never does
                    # this, but stay safe)
                    new_envs.append(trial)
        envs = new_envs

    if ast.where is not None:
        pred = _compile_condition(ast.where, res, schema)
        envs = [e for e in envs if pred(e)]

    out = _project(ast, envs, res)
    if ast.distinct:
        seen = set()
        deduped = []
        for r in out.rows:
            key = tuple(_value_key(v) for v in r)
            if key not in seen:
                seen.add(key)
                deduped.append(r)
        out = ResultTable(out.columns, deduped)
    return out


def _validate_items(ast: Select, res: _Resolver) -> None:
    if not ast.items:
        raise SqlSyntaxError("empty select list")
    if isinstance(ast.items[0], Star):
        if len(ast.items) > 1:
            raise SqlSyntaxError("* cannot be combined with other select items")
        if ast.group_by:
            raise SqlSyntaxError("* with GROUP BY is not in the subset")
        return
    has_agg = any(isinstance(it, Aggregate) for it in ast.items)
    group_keys = set()
    for c in ast.group_by:
        group_keys.add(res.resolve(c))
    for it in ast.items:
        if isinstance(it, ColumnRef):
            where = res.resolve(it)
            if ast.group_by:
                if where not in group_keys:
                    raise SqlSyntaxError(
                        f"column {it.render()!r} not in GROUP BY"
                    )
            elif has_agg:
                raise SqlSyntaxError(
                    f"bare column {it.render()!r} mixed with aggregates"
                )
        else:
            if isinstance(it.arg, Star):
                if it.func != "COUNT":
                    raise SqlSyntaxError(f"{it.func} ( * ) is not in the subset")
            else:
                res.resolve(it.arg)


def _materialize_scalar(sub: Select, schema: SchemaBundle):
    """Value of a scalar subquery, or None when it yields no rows."""
    table = execute(sub, schema)
    if len(table.columns) != 1:
        raise SqlSyntaxError("scalar subquery must select exactly one column")
    if len(table.rows) == 0:
        return None
    if len(table.rows) > 1:
        raise SqlSyntaxError("scalar subquery yielded more than one row")
    return table.rows[0][0]


def _compile_condition(node, res: _Resolver, schema: SchemaBundle):
    """Build an env → bool closure; subqueries are materialized here, once."""
    if isinstance(node, And):
        parts = [_compile_condition(p, res, schema) for p in node.parts]
        return lambda e: all(p(e) for p in parts)
    if isinstance(node, Or):
        parts = [_compile_condition(p, res, schema) for p in node.parts]
        return lambda e: any(p(e) for p in parts)
    if isinstance(node, Comparison):
        left = _compile_operand(node.left, res, schema)
        right = _compile_operand(node.right, res, schema)
        op = node.op
        def cmp(e):
            a, b = left(e), right(e)
            if a is None or b is None:
                return False
            if op == "=":
                return _strict_equal(a, b)
            if op == "<>":
                return not _strict_equal(a, b)
            return _ordered(a, op, b)
        return cmp
    if isinstance(node, InPredicate):
        operand = _compile_operand(node.operand, res, schema)
        table = execute(node.query, schema)
        if len(table.columns) != 1:
            raise SqlSyntaxError("IN subquery must select exactly one column")
        members = {_value_key(r[0]) for r in table.rows}
        str_members = any(isinstance(r[0], str) for r in table.rows)
        num_members = any(not isinstance(r[0], str) for r in table.rows)
        negated = node.negated
        def contains(e):
            v = operand(e)
            if isinstance(v, str) and num_members:
                raise TypeMismatch("text operand against numeric IN set")
            if not isinstance(v, str) and str_members:
                raise TypeMismatch("numeric operand against text IN set")
            hit = _value_key(v) in members
            return (not hit) if negated else hit
        return contains
    if isinstance(node, ExistsPredicate):
        table = execute(node.query, schema)
        truth = bool(table.rows) != node.negated
        return lambda e: truth
    raise AssertionError(f"unexpected condition node {node!r}")


def _compile_operand(node, res: _Resolver, schema: SchemaBundle):
    if isinstance(node, ColumnRef):
        t, i = res.resolve(node)
        return lambda e: e[t][i]
    if isinstance(node, Literal):
        if node.is_placeholder:
            raise UnboundPlaceholder(f"unbound placeholder {node.text}")
        v = node.value()
        return lambda e: v
    if isinstance(node, Select):
        v = _materialize_scalar(node, schema)
        return lambda e: v
    raise AssertionError(f"unexpected operand {node!r}")


def _project(ast: Select, envs: list[dict], res: _Resolver) -> ResultTable:
    columns = _column_names(ast, res)
    if isinstance(ast.items[0], Star):
        rows = []
        for e in envs:
            vals: list = []
            for t in ast.tables:
                vals.extend(e[t])
            rows.append(tuple(vals))
        return ResultTable(columns, rows)

    has_agg = any(isinstance(it, Aggregate) for it in ast.items)
    if ast.group_by:
        rows = []
        group_cols = [res.resolve(c) for c in ast.group_by]
        order: list = []
        groups: dict = {}
        for e in envs:
            key = tuple(_value_key(e[t][i]) for t, i in group_cols)
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(e)
        for key in order:
            members = groups[key]
            rows.append(tuple(_item_value(it, members, res) for it in ast.items))
        return ResultTable(columns, rows)
    if has_agg:
        all_count = all(
            isinstance(it, Aggregate) and it.func == "COUNT" for it in ast.items
        )
        if not envs and not all_count:
            return ResultTable(columns, [])
        return ResultTable(
            columns, [tuple(_item_value(it, envs, res) for it in ast.items)]
        )
    rows = []
    for e in envs:
        rows.append(tuple(_item_value(it, [e], res) for it in ast.items))
    return ResultTable(columns, rows)


def _item_value(item, envs: list[dict], res: _Resolver):
    if isinstance(item, ColumnRef):
        t, i = res.resolve(item)
        return envs[0][t][i]
    assert isinstance(item, Aggregate)
    if isinstance(item.arg, Star):
        return len(envs)
    t, i = res.resolve(item.arg)
    values = [e[t][i] for e in envs]
    if item.func == "COUNT":
        return len(values)
    if item.func == "SUM":
        total = sum(Fraction(v) for v in values)
        return int(total) if total.denominator == 1 else total
    if item.func == "AVG":
        return sum(Fraction(v) for v in values) / len(values)
    if item.func == "MIN":
        return min(values)
    if item.func == "MAX":
        return max(values)
    raise AssertionError(item.func)


def _column_names(ast: Select, res: _Resolver) -> list[str]:
    if isinstance(ast.items[0], Star):
        names = []
        for t in ast.tables:
            for c in res.schema.table(t).columns:
                names.append(f"{t}.{c.name}")
        return names
    names = []
    for it in ast.items:
        if isinstance(it, ColumnRef):
            t, _ = res.resolve(it)
            names.append(f"{t}.{it.column}")
        elif isinstance(it.arg, Star):
            names.append(f"{it.func}(*)")
        else:
            t, _ = res.resolve(it.arg)
            names.append(f"{it.func}({t}.{it.arg.column})")
    return names


def rows_equal_multiset(a: list[tuple], b: list[tuple], tol: float = NUMERIC_TOL) -> bool:
    """Multiset equality of row lists; numbers compare within tol."""
    if len(a) != len(b):
        return False
    def sort_key(row):
        return tuple(
            (1, v) if isinstance(v, str) else (0, float(v)) for v in row
        )
    sa = sorted(a, key=sort_key)
    sb = sorted(b, key=sort_key)
    for ra, rb in zip(sa, sb):
        if len(ra) != len(rb):
            return False
        if not all(values_equal(x, y, tol) for x, y in zip(ra, rb)):
            return False
    return True


def relaxed_correct(predicted: ResultTable, gold: ResultTable) -> bool:
    """Gold columns must all appear in predicted; the projection of
    predicted onto them must equal gold's row multiset."""
    try:
        positions = [predicted.columns.index(c) for c in gold.columns]
    except ValueError:
        return False
    projected = [tuple(r[p] for p in positions) for r in predicted.rows]
    return rows_equal_multiset(projected, gold.rows)
