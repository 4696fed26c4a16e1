"""Instantiates NL-SQL training pairs from schema-independent templates.

A template pair is one SQL token pattern plus one or more NL patterns, both
holding typed slots written {SlotName}. Database-item slots (Table,
Attribute, Filter, ...) fill from the schema; any other slot name is a
phrase slot filled from a lexicon. A slot may carry a render modifier,
e.g. {MaxMinAttribute.col} for the bare column of an aggregate slot.

Instances are drawn uniformly without replacement from the full conditional
slot product: branches are the (Table, Table2) choices, and within a branch
every remaining slot is an independent dimension, so a single integer index
addresses one assignment via mixed-radix decoding. Nothing is materialized,
which keeps sampling exact for products far past memory size.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import EmptyLexicon, MalformedSchema, SlotUnfillable
from .schema import ColumnDef, SchemaBundle, TableDef
from .textnorm import lemmatize, stable_hash, tokenize_nl
from . import sqlparser

TEMPLATE_TAGS = ("select", "aggregate", "groupby", "join", "nested")

_SLOT_RE = re.compile(r"\{([A-Za-z][A-Za-z0-9]*)(?:\.([a-z]+))?\}")


@dataclass(frozen=True)
class TemplatePair:
    id: str
    tags: tuple[str, ...]
    sql: str
    nl: tuple[str, ...]


@dataclass(frozen=True)
class NlSqlPair:
    nl: str
    sql: str
    placeholders: tuple[str, ...]
    provenance: str

    @property
    def template_id(self) -> str:
        return self.provenance.split("#", 1)[0]


@dataclass
class GeneratorConfig:
    """The tuning parameters of the generation procedure, plus the seed."""

    size_slotfills: int = 600
    size_tables: int = 2
    groupBy_p: float = 0.7
    join_boost: float = 1.0
    agg_boost: float = 1.0
    nest_boost: float = 1.0
    size_para: int = 2
    num_para: int = 2
    num_missing: int = 2
    randDrop_p: float = 1.0
    seed: int = 0
    min_para_score: float = 0.0

    def __post_init__(self):
        if self.size_slotfills < 1:
            raise ValueError("size_slotfills must be positive")
        if self.size_tables < 1:
            raise ValueError("size_tables must be >= 1")
        if self.size_para < 1:
            raise ValueError("size_para must be positive")
        if self.num_para < 0 or self.num_missing < 0:
            raise ValueError("num_para and num_missing must be nonnegative")
        for name in ("groupBy_p", "randDrop_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        for name in ("join_boost", "agg_boost", "nest_boost"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown generator parameters: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def load_templates(path: str | Path) -> list[TemplatePair]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedSchema(f"template file {path}: {exc}") from None
    if not isinstance(raw, list):
        raise MalformedSchema(f"template file {path}: expected a JSON array")
    templates = []
    for entry in raw:
        try:
            templates.append(
                TemplatePair(
                    id=entry["id"],
                    tags=tuple(entry.get("tags", ())),
                    sql=entry["sql"],
                    nl=tuple(entry["nl"]),
                )
            )
        except (TypeError, KeyError) as exc:
            raise MalformedSchema(
                f"template file {path}: bad entry {entry!r}: {exc}"
            ) from None
    return templates


def load_lexicon(path: str | Path) -> dict[str, list[str]]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedSchema(f"lexicon file {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise MalformedSchema(f"lexicon file {path}: expected a JSON object")
    return {k: list(v) for k, v in raw.items()}


# ------------------------------------------------------------- slot model
#
# A slot value is rendered differently on the SQL and NL sides; filters also
# carry the placeholder they introduce. Values are plain tuples so the
# decoder stays trivial.


def _placeholder(table: str, column: str) -> str:
    return f"@{table.upper()}.{column.upper()}"


def _filter_value(table: TableDef, col: ColumnDef, op: str):
    return (table.name, col, op)


_NL_OP_WORDS = {
    "=": "",
    ">": "greater than",
    "<": "less than",
    ">=": "at least",
    "<=": "at most",
    "<>": "not",
}


def _render_filter(value, side: str, mode: str | None, qualified: bool) -> str:
    tname, col, op = value
    ph = _placeholder(tname, col.name)
    if side == "sql":
        colref = f"{tname}.{col.name}" if qualified else col.name
        return f"{colref} {op} {ph}"
    if mode == "val":
        # value-as-modifier phrasing ("get <value> patients"); equality only
        return ph
    if mode == "bare":
        # column and value with no operator word; the template text carries
        # the negation or comparison itself ("do not have age 80")
        return f"{col.surface_form()} {ph}"
    words = [col.surface_form()]
    if mode == "be":
        words.append("be")
    opw = _NL_OP_WORDS[op]
    if opw:
        words.append(opw)
    words.append(ph)
    return " ".join(words)


class _SlotKind:
    def __init__(self, domain: Callable, render: Callable, excludes: str | None = None):
        self.domain = domain
        self.render = render
        self.excludes = excludes


def _columns(schema, branch, table_slot="Table"):
    return list(schema.table(branch[table_slot]).columns)


def _num_columns(schema, branch, table_slot="Table"):
    return [c for c in _columns(schema, branch, table_slot) if c.is_numeric]


def _render_column(value, side, mode, qualified=False):
    tname, col = value
    if side == "sql":
        return f"{tname}.{col.name}" if qualified else col.name
    return col.surface_form()


def _render_maxmin(value, side, mode):
    tname, col, func = value
    if side == "sql":
        if mode == "col":
            return col.name
        return f"{func} ( {col.name} )"
    word = "maximum" if func == "MAX" else "minimum"
    return f"{word} {col.surface_form()}"


DB_SLOTS: dict[str, _SlotKind] = {
    "Table": _SlotKind(
        domain=lambda schema, branch: [t.name for t in schema.tables],
        render=lambda schema, v, side, mode: (
            v if side == "sql" else schema.table(v).surface_form()
        ),
    ),
    "Table2": _SlotKind(
        domain=None,  # bound at branch level, never a free dimension
        render=lambda schema, v, side, mode: (
            v if side == "sql" else schema.table(v).surface_form()
        ),
    ),
    "Attribute": _SlotKind(
        domain=lambda schema, branch: [
            (branch["Table"], c) for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_column(v, side, mode),
    ),
    "Attribute2": _SlotKind(
        domain=lambda schema, branch: [
            (branch["Table"], c) for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_column(v, side, mode),
        excludes="Attribute",
    ),
    "AttributeAfter": _SlotKind(
        domain=lambda schema, branch: [
            (branch["Table"], c) for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_column(v, side, mode),
    ),
    "NumAttribute": _SlotKind(
        domain=lambda schema, branch: [
            (branch["Table"], c) for c in _num_columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_column(v, side, mode),
    ),
    "TextAttribute": _SlotKind(
        domain=lambda schema, branch: [
            (branch["Table"], c)
            for c in _columns(schema, branch)
            if not c.is_numeric
        ],
        render=lambda schema, v, side, mode: _render_column(v, side, mode),
    ),
    "QAttribute": _SlotKind(
        domain=lambda schema, branch: [
            (branch["Table"], c) for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_column(
            v, side, mode, qualified=True
        ),
    ),
    "QNumAttribute": _SlotKind(
        domain=lambda schema, branch: [
            (branch["Table"], c) for c in _num_columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_column(
            v, side, mode, qualified=True
        ),
    ),
    "Filter": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, "=")
            for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
    ),
    "Filter2": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, "=")
            for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
        excludes="Filter",
    ),
    "FilterAfter": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, "=")
            for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
    ),
    "GtFilter": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, ">")
            for c in _num_columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
    ),
    "LtFilter": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, "<")
            for c in _num_columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
    ),
    "GeFilter": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, ">=")
            for c in _num_columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
    ),
    "LeFilter": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, "<=")
            for c in _num_columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
    ),
    "NegFilter": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, "<>")
            for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
    ),
    "QFilter": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table"]), c, "=")
            for c in _columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, True),
    ),
    "QFilter2": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table2"]), c, "=")
            for c in _columns(schema, branch, "Table2")
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, True),
    ),
    "Filter2T": _SlotKind(
        domain=lambda schema, branch: [
            _filter_value(schema.table(branch["Table2"]), c, "=")
            for c in _columns(schema, branch, "Table2")
        ],
        render=lambda schema, v, side, mode: _render_filter(v, side, mode, False),
    ),
    "MaxMinAttribute": _SlotKind(
        domain=lambda schema, branch: [
            (branch["Table"], c, func)
            for func in ("MAX", "MIN")
            for c in _num_columns(schema, branch)
        ],
        render=lambda schema, v, side, mode: _render_maxmin(v, side, mode),
    ),
}

# FkLocal / FkRemote render the two ends of the fk edge joining Table and
# Table2; they are derived from the branch, never sampled.
DERIVED_SLOTS = ("FkLocal", "FkRemote")


def _fk_edge_between(schema: SchemaBundle, t1: str, t2: str):
    for e in schema.fk_edges:
        if set(e.tables()) == {t1, t2}:
            return e
    return None


def _derived_value(name: str, schema: SchemaBundle, branch: dict) -> str:
    edge = _fk_edge_between(schema, branch["Table"], branch["Table2"])
    if edge is None:
        raise SlotUnfillable(
            f"no foreign key between {branch['Table']} and {branch['Table2']}"
        )
    if edge.from_table == branch["Table"]:
        local, remote = edge.from_column, edge.to_column
    else:
        local, remote = edge.to_column, edge.from_column
    return local if name == "FkLocal" else remote


# --------------------------------------------------------- template parsing


def _slots_of(text: str) -> list[tuple[str, str | None]]:
    return [(m.group(1), m.group(2)) for m in _SLOT_RE.finditer(text)]


def _slot_names(template: TemplatePair, variant: str) -> list[str]:
    """Unique slot names across the SQL side and one NL variant, with Table
    and Table2 hoisted to the front (they parameterize the other domains)."""
    seen: list[str] = []
    for name, _mode in _slots_of(template.sql) + _slots_of(variant):
        if name not in seen and name not in DERIVED_SLOTS:
            seen.append(name)
    ordered = [n for n in ("Table", "Table2") if n in seen]
    rest = [n for n in seen if n not in ("Table", "Table2")]
    # exclusion partners must be decoded before their dependents
    rest.sort(key=lambda n: 0 if n in ("Attribute", "Filter") else 1)
    return ordered + rest


def validate_templates(
    templates: list[TemplatePair], lex: dict[str, list[str]]
) -> list[tuple[str, str]]:
    """Invariant violations as (template id, message); empty means valid."""
    report: list[tuple[str, str]] = []
    seen_ids = set()
    for t in templates:
        if t.id in seen_ids:
            report.append((t.id, "duplicate template id"))
        seen_ids.add(t.id)
        for tag in t.tags:
            if tag not in TEMPLATE_TAGS:
                report.append((t.id, f"unknown tag {tag!r}"))
        sql_slots = {name for name, _ in _slots_of(t.sql)}
        for name in sql_slots:
            if name not in DB_SLOTS and name not in DERIVED_SLOTS:
                report.append(
                    (t.id, f"phrase slot {{{name}}} not allowed in sql template")
                )
        if not t.nl:
            report.append((t.id, "no nl templates"))
        # Table/Table2 are bound by any dependent slot on the SQL side, so
        # the NL side may verbalize them even when the SQL text does not
        # (@JOIN templates rely on this).
        table_bound = any(s in DB_SLOTS for s in sql_slots)
        table2_bound = any(
            s in ("Table2", "QFilter2", "Filter2T") for s in sql_slots
        ) or any(s in DERIVED_SLOTS for s, _ in _slots_of(t.sql))
        for i, variant in enumerate(t.nl):
            for name, _ in _slots_of(variant):
                if name in DB_SLOTS or name in DERIVED_SLOTS:
                    if name in sql_slots or name in DERIVED_SLOTS:
                        continue
                    if name == "Table" and table_bound:
                        continue
                    if name == "Table2" and table2_bound:
                        continue
                    report.append(
                        (
                            t.id,
                            f"nl[{i}] slot {{{name}}} missing from sql template",
                        )
                    )
                else:
                    phrases = lex.get(name)
                    if not phrases:
                        report.append(
                            (t.id, f"nl[{i}] phrase slot {{{name}}} not in lexicon")
                        )
    return report


def template_boost(template: TemplatePair, cfg: GeneratorConfig) -> float:
    boost = 1.0
    if "join" in template.tags:
        boost *= cfg.join_boost
    if "aggregate" in template.tags:
        boost *= cfg.agg_boost
    if "nested" in template.tags:
        boost *= cfg.nest_boost
    return boost


def template_quota(template: TemplatePair, cfg: GeneratorConfig) -> int:
    return round(cfg.size_slotfills * template_boost(template, cfg))


# --------------------------------------------------------- enumeration core


class _VariantSpace:
    """The slot product of one (sql template, nl variant) pair."""

    def __init__(
        self,
        schema: SchemaBundle,
        template: TemplatePair,
        variant_idx: int,
        lex: dict[str, list[str]],
        cfg: GeneratorConfig,
    ):
        self.schema = schema
        self.template = template
        self.variant_idx = variant_idx
        self.variant = template.nl[variant_idx]
        self.cfg = cfg
        self.slot_order = _slot_names(template, self.variant)
        self.uses_table2 = (
            any(
                n in ("Table2", "QFilter2", "Filter2T") for n in self.slot_order
            )
            or any(
                name in DERIVED_SLOTS
                for name, _ in _slots_of(template.sql) + _slots_of(self.variant)
            )
        )

        self.dims = [
            n for n in self.slot_order if n not in ("Table", "Table2")
        ]
        self.phrase_domains: dict[str, list[str]] = {}
        for name in self.dims:
            if name not in DB_SLOTS:
                phrases = lex.get(name)
                if not phrases:
                    raise EmptyLexicon(
                        f"template {template.id}: phrase slot {{{name}}} "
                        f"has no phrases"
                    )
                self.phrase_domains[name] = list(phrases)

        self.branches: list[tuple[dict, list[int], int]] = []
        self.total = 0
        self._empty_slot: str | None = None
        for branch in self._branch_choices():
            sizes = []
            dead = False
            for name in self.dims:
                n = len(self._domain(name, branch))
                if name in DB_SLOTS and DB_SLOTS[name].excludes in self.dims:
                    n -= 1
                if n <= 0:
                    self._empty_slot = self._empty_slot or name
                    dead = True
                    break
                sizes.append(n)
            if dead:
                continue
            size = 1
            for n in sizes:
                size *= n
            self.branches.append((branch, sizes, size))
            self.total += size

    def _branch_choices(self):
        if "Table" not in self.slot_order:
            yield {}
            return
        if not self.uses_table2:
            for t in self.schema.tables:
                yield {"Table": t.name}
            return
        if self.cfg.size_tables < 2:
            return  # two-table templates are shut off below size_tables = 2
        g = self.schema.join_graph()
        for t in self.schema.tables:
            for other, _pred in g.neighbors(t.name):
                yield {"Table": t.name, "Table2": other}

    def _domain(self, name: str, branch: dict) -> list:
        if name in DB_SLOTS:
            return DB_SLOTS[name].domain(self.schema, branch)
        return self.phrase_domains[name]

    def unfillable_reason(self) -> str:
        t = self.template
        if self.uses_table2 and self.cfg.size_tables < 2:
            return f"template {t.id}: needs 2 tables but size_tables < 2"
        if self.uses_table2 and not self.branches:
            return f"template {t.id}: schema has no foreign-key-adjacent tables"
        if self._empty_slot:
            return (
                f"template {t.id}: no schema item fits slot "
                f"{{{self._empty_slot}}}"
            )
        return f"template {t.id}: slot product is empty"

    def decode(self, index: int) -> dict:
        """Assignment for the index-th point of the product, canonical order."""
        cum = 0
        for branch, sizes, size in self.branches:
            if index < cum + size:
                offset = index - cum
                binding = dict(branch)
                coords = []
                for n in sizes:
                    coords.append(offset % n)
                    offset //= n
                for name, coord in zip(self.dims, coords):
                    domain = self._domain(name, binding)
                    kind = DB_SLOTS.get(name)
                    if kind is not None and kind.excludes in self.dims:
                        partner = binding[kind.excludes]
                        partner_idx = domain.index(partner)
                        if coord >= partner_idx:
                            coord += 1
                    binding[name] = domain[coord]
                return binding
            cum += size
        raise IndexError(index)

    def render(self, binding: dict) -> tuple[str, str]:
        sql = self._substitute(self.template.sql, binding, "sql")
        nl = self._substitute(self.variant, binding, "nl")
        return sql, nl

    def _substitute(self, text: str, binding: dict, side: str) -> str:
        def repl(m):
            name, mode = m.group(1), m.group(2)
            if name in DERIVED_SLOTS:
                return _derived_value(name, self.schema, binding)
            value = binding[name]
            if name in DB_SLOTS:
                return DB_SLOTS[name].render(self.schema, value, side, mode)
            return value

        return _SLOT_RE.sub(repl, text)


def _degenerate_binding(binding: dict) -> bool:
    """True when two slots collide in the NL (same column, or the same
    surface word from different tables), or a column shares its name with a
    bound table. Such fills produce queries (project the filtered column,
    group an attribute by itself, filter a doctor's name while projecting a
    patient's) whose NL token sets collapse onto other intents.
    """
    tables = set()
    cols: list[tuple[str, str]] = []
    surfaces: list[str] = []
    for name, value in binding.items():
        if name not in DB_SLOTS:
            continue
        if name in ("Table", "Table2"):
            tables.add(value)
        elif isinstance(value, tuple):
            tname, col = value[0], value[1]
            cols.append((tname, col.name))
            surfaces.append(col.surface_form())
    seen: set = set()
    for ref in cols:
        if ref in seen:
            return True
        seen.add(ref)
    seen = set()
    for surf in surfaces:
        if surf in seen:
            return True
        seen.add(surf)
    return any(col in tables for _t, col in cols)


# Slot pairs whose SQL rendering is order-free: a projection list and an AND
# conjunction name the same query either way round, so only the canonical
# (column-sorted) order is emitted and the swapped twin never enters a corpus.
_ORDERED_PAIRS = (("Attribute", "AttributeAfter"), ("Filter", "FilterAfter"))


def _noncanonical_binding(binding: dict) -> bool:
    for first, second in _ORDERED_PAIRS:
        if first in binding and second in binding:
            a, b = binding[first], binding[second]
            if (a[0], a[1].name) >= (b[0], b[1].name):
                return True
    return False


def _split_quota(quota: int, parts: int) -> list[int]:
    base, extra = divmod(quota, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _emit_variant(
    space: _VariantSpace, share: int, cfg: GeneratorConfig
) -> list[NlSqlPair]:
    t = space.template
    rng = random.Random(stable_hash(cfg.seed, t.id, space.variant_idx))
    take = min(share, space.total)
    if take <= 0:
        return []
    if take == space.total:
        indices = range(space.total)
    else:
        indices = sorted(rng.sample(range(space.total), take))
    grouped = "groupby" in t.tags
    out = []
    for index in indices:
        keep = True
        if grouped:
            keep = rng.random() < cfg.groupBy_p
        if not keep:
            continue
        binding = space.decode(index)
        if _degenerate_binding(binding) or _noncanonical_binding(binding):
            continue
        sql_raw, nl_raw = space.render(binding)
        ast = sqlparser.parse(sql_raw)
        sql = sqlparser.render(ast)
        nl_tokens = lemmatize(tokenize_nl(nl_raw))
        nl = " ".join(nl_tokens)
        placeholders = tuple(
            tok for tok in sql.split(" ") if tok.startswith("@") and tok != "@JOIN"
        )
        out.append(
            NlSqlPair(
                nl=nl,
                sql=sql,
                placeholders=placeholders,
                provenance=f"{t.id}#{space.variant_idx}",
            )
        )
    return out


def instantiate(
    schema: SchemaBundle,
    templates: list[TemplatePair],
    lex: dict[str, list[str]],
    cfg: GeneratorConfig,
) -> list[NlSqlPair]:
    """Emit up to quota(t) instances per template, split evenly across its
    NL variants; raises SlotUnfillable when a template cannot fill at all."""
    pairs: list[NlSqlPair] = []
    for t in sorted(templates, key=lambda t: t.id):
        quota = template_quota(t, cfg)
        if quota == 0:
            continue
        shares = _split_quota(quota, len(t.nl))
        spaces = [
            _VariantSpace(schema, t, vi, lex, cfg) for vi in range(len(t.nl))
        ]
        if all(s.total == 0 for s in spaces):
            raise SlotUnfillable(spaces[0].unfillable_reason())
        for space, share in zip(spaces, shares):
            pairs.extend(_emit_variant(space, share, cfg))
    return pairs


def instantiate_nested(
    schema: SchemaBundle,
    templates: list[TemplatePair],
    lex: dict[str, list[str]],
    cfg: GeneratorConfig,
) -> list[NlSqlPair]:
    nested = [t for t in templates if "nested" in t.tags]
    return instantiate(schema, nested, lex, cfg)


def template_applicable(
    schema: SchemaBundle,
    template: TemplatePair,
    lex: dict[str, list[str]],
    cfg: GeneratorConfig,
) -> bool:
    """True when at least one variant of the template has a nonempty slot
    product on this schema under this config."""
    try:
        spaces = [
            _VariantSpace(schema, template, vi, lex, cfg)
            for vi in range(len(template.nl))
        ]
    except EmptyLexicon:
        return False
    return any(s.total > 0 for s in spaces)
