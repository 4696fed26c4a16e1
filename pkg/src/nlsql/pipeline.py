"""Runtime chain: anonymize constants, translate, repair the result.

preprocess() turns user text into the anonymized lemmatized token form
the model was trained on, recording which constant each placeholder
stands for. postprocess() undoes the anonymization on the model's SQL
and applies structural repairs: constant re-substitution with trigram
snapping, FROM-clause completion, and @JOIN expansion.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

from .errors import (
    NlsqlError,
    NoCandidateColumn,
    PipelineError,
    SqlSyntaxError,
    UnboundPlaceholder,
    UnrepairableSql,
)
from .schema import JoinGraph, SchemaBundle, shortest_join_path
from .sqlexec import ResultTable, execute
from .sqlparser import (
    Aggregate,
    ColumnRef,
    Comparison,
    ExistsPredicate,
    InPredicate,
    JoinClause,
    Literal,
    Select,
    parse,
    tokenize_sql,
)
from .textnorm import (
    JOIN_TOKEN,
    is_number,
    lemmatize_token,
    normalize_constant,
    scan_nl,
    trigram_jaccard_distance,
)
from .translate import TranslationModel
from .valueindex import ValueIndex

DEFAULT_DELTA_JAC = 0.8


@dataclass(frozen=True)
class Binding:
    """One detected constant. placeholder is empty when classification
    failed and the constant was left in the text verbatim."""

    placeholder: str
    constant: str
    warning: str | None = None


@dataclass
class TranslationOutcome:
    original_nl: str
    anonymized_nl: str
    bindings: list[Binding]
    raw_sql: str
    repaired_sql: str
    repairs: list[str]
    final_sql: str
    score: float = 0.0
    result: ResultTable | None = None
    error: str | None = None

    def bindings_map(self) -> dict[str, str]:
        return {b.placeholder: b.constant for b in self.bindings if b.placeholder}

    def warnings(self) -> list[str]:
        return [b.warning for b in self.bindings if b.warning]


# -------------------------------------------------------------- preprocess


def _constant_spans(raw_tokens, idx: ValueIndex) -> list[tuple[int, int, str]]:
    """Detect constant token spans: quoted text, capitalized runs, numbers,
    then exact value-index n-grams, in that claim order."""
    n = len(raw_tokens)
    claimed = [False] * n
    spans: list[tuple[int, int, str]] = []

    def claim(i: int, j: int, text: str) -> None:
        spans.append((i, j, text))
        for t in range(i, j):
            claimed[t] = True

    for i, (surface, _s, _e) in enumerate(raw_tokens):
        if surface[0] in "'\"" and len(surface) >= 2:
            inner = surface[1:-1].strip()
            if inner:
                claim(i, i + 1, inner)
            else:
                claimed[i] = True

    i = 0
    while i < n:
        surface = raw_tokens[i][0]
        if claimed[i] or not (surface[0].isalpha() and surface[0].isupper()):
            i += 1
            continue
        j = i
        while (
            j < n
            and not claimed[j]
            and raw_tokens[j][0][0].isalpha()
            and raw_tokens[j][0][0].isupper()
        ):
            j += 1
        # a lone capitalized sentence opener is not a constant
        if not (i == 0 and j - i == 1):
            claim(i, j, " ".join(raw_tokens[t][0] for t in range(i, j)))
        i = j

    for i, (surface, _s, _e) in enumerate(raw_tokens):
        if not claimed[i] and is_number(surface):
            claim(i, i + 1, surface)

    max_len = 0
    for key in idx.postings:
        max_len = max(max_len, len(key.split()))
    max_len = min(max_len, 4)
    for length in range(max_len, 0, -1):
        for i in range(n - length + 1):
            if any(claimed[i : i + length]):
                continue
            toks = [raw_tokens[t][0] for t in range(i, i + length)]
            if any(not t[0].isalpha() for t in toks):
                continue
            if normalize_constant(" ".join(toks)) in idx.postings:
                claim(i, i + length, " ".join(toks))

    spans.sort()
    return spans


def _column_words(schema: SchemaBundle, table: str, column: str) -> set[str]:
    col = schema.table(table).column(column)
    words = set()
    for src in [col.name.replace("_", " ")] + list(col.synonyms):
        words.update(lemmatize_token(w) for w in src.lower().split())
    return words


def _table_words(table: str) -> set[str]:
    return {lemmatize_token(w) for w in table.replace("_", " ").split()}


def _choose_column(
    candidates: list[tuple[str, str, float]],
    span_start: int,
    lemmas: list[str],
    schema: SchemaBundle,
) -> tuple[str, str, float]:
    """Pick among equally scored candidates using NL context: a column
    surface word just before the constant outranks a table mention
    anywhere, which outranks classifier order."""
    top = candidates[0][2]
    group = [cand for cand in candidates if cand[2] == top]
    if len(group) == 1:
        return group[0]
    window = set(lemmas[max(0, span_start - 3) : span_start])
    everywhere = set(lemmas)
    ranked = []
    for order, (t, c, s) in enumerate(group):
        points = 0
        if _column_words(schema, t, c) & window:
            points += 2
        if _table_words(t) & everywhere:
            points += 1
        ranked.append((-points, order, (t, c, s)))
    ranked.sort()
    return ranked[0][2]


def preprocess(
    nl: str, schema: SchemaBundle, idx: ValueIndex
) -> tuple[list[str], list[Binding]]:
    """Anonymize constants to @TABLE.COLUMN placeholders and lemmatize."""
    if not nl or not nl.strip():
        raise ValueError("empty input")
    raw_tokens = scan_nl(nl)
    if not raw_tokens:
        raise ValueError("input has no tokens")
    spans = _constant_spans(raw_tokens, idx)

    # context lemmas, with constant spans blanked so a multi-word constant
    # does not count as a table mention
    lemmas = [lemmatize_token(s.lower()) for s, _x, _y in raw_tokens]
    for i, j, _t in spans:
        for t in range(i, j):
            lemmas[t] = ""

    replacement: dict[int, list[str]] = {}
    consumed: set[int] = set()
    bindings: list[Binding] = []
    for i, j, text in spans:
        consumed.update(range(i, j))
        try:
            candidates = idx.classify(text)
        except NoCandidateColumn as exc:
            bindings.append(Binding("", text, str(exc)))
            replacement[i] = [raw_tokens[t][0].lower() for t in range(i, j)]
            continue
        table, column, _score = _choose_column(candidates, i, lemmas, schema)
        ph = f"@{table.upper()}.{column.upper()}"
        bindings.append(Binding(ph, text))
        replacement[i] = [ph]

    out: list[str] = []
    for i, (surface, _s, _e) in enumerate(raw_tokens):
        if i in replacement:
            out.extend(replacement[i])
        elif i in consumed:
            continue
        elif surface.startswith("@"):
            out.append(surface.upper())
        else:
            out.append(lemmatize_token(surface.lower()))
    return out, bindings


# ------------------------------------------------------------- postprocess


def _snap_constant(
    text: str, stored: list[str], delta_jac: float
) -> tuple[str, bool]:
    """Return the stored value nearest by trigram Jaccard distance, or the
    user's text when nothing is close enough. Second element: snapped."""
    norm = normalize_constant(text)
    for v in stored:
        if normalize_constant(v) == norm:
            return v, False
    if not stored:
        return text, False
    best = min(stored, key=lambda v: (trigram_jaccard_distance(text, v), v))
    if trigram_jaccard_distance(text, best) > delta_jac:
        return text, False
    return best, True


def _substitute(
    tokens: list[str],
    bindings,
    schema: SchemaBundle,
    delta_jac: float,
    log: list[str],
) -> list[str]:
    if isinstance(bindings, dict):
        bindings = [Binding(ph, c) for ph, c in bindings.items()]
    queues: dict[str, deque[str]] = {}
    for b in bindings:
        if b.placeholder:
            queues.setdefault(b.placeholder, deque()).append(b.constant)
    last: dict[str, str] = {}

    out = []
    for tok in tokens:
        if not tok.startswith("@") or tok == JOIN_TOKEN:
            out.append(tok)
            continue
        queue = queues.get(tok)
        if queue:
            const = queue.popleft()
            last[tok] = const
        elif tok in last:
            const = last[tok]
        else:
            raise UnboundPlaceholder(f"{tok} has no bound constant")
        table, _dot, column = tok[1:].lower().partition(".")
        col = None
        if schema.has_table(table) and schema.table(table).has_column(column):
            col = schema.table(table).column(column)
        if col is not None and col.is_numeric and is_number(const):
            out.append(const)
            continue
        stored = []
        if col is not None and not col.is_numeric:
            stored = [str(v) for v in schema.column_values(table, column)]
        value, snapped = _snap_constant(const, stored, delta_jac)
        if snapped:
            log.append(f"constant {const!r} -> {value!r} in {table}.{column}")
        # the tokenizer cannot represent embedded quotes
        out.append("'" + value.replace("'", "") + "'")
    return out


def _top_level_tables(ast: Select, schema: SchemaBundle) -> set[str]:
    """Tables referenced by columns that must resolve in this query's own
    FROM scope; nested selects carry their own FROM and are skipped."""
    tables: set[str] = set()

    def from_ref(ref: ColumnRef) -> None:
        if ref.table is not None:
            tables.add(ref.table)
            return
        owners = schema.owners_of_column(ref.column)
        if len(owners) == 1:
            tables.add(owners[0])

    def from_operand(op) -> None:
        if isinstance(op, ColumnRef):
            from_ref(op)

    def walk(node) -> None:
        if node is None:
            return
        if hasattr(node, "parts"):
            for p in node.parts:
                walk(p)
        elif isinstance(node, Comparison):
            from_operand(node.left)
            from_operand(node.right)
        elif isinstance(node, InPredicate):
            from_operand(node.operand)
        elif isinstance(node, ExistsPredicate):
            pass

    for item in ast.items:
        if isinstance(item, ColumnRef):
            from_ref(item)
        elif isinstance(item, Aggregate) and isinstance(item.arg, ColumnRef):
            from_ref(item.arg)
    walk(ast.where)
    for ref in ast.group_by:
        from_ref(ref)
    return tables


def _path_to_from(path) -> tuple[tuple[str, ...], tuple[JoinClause, ...]]:
    tables = (path[0][0],)
    joins = []
    for table, pred in path[1:]:
        joins.append(
            JoinClause(
                table,
                ColumnRef(pred.from_table, pred.from_column),
                ColumnRef(pred.to_table, pred.to_column),
            )
        )
    return tables, tuple(joins)


def expand_join(
    sql: str, schema: SchemaBundle, g: JoinGraph | None = None
) -> str:
    """Expand a FROM @JOIN into the minimal explicit join chain.

    Queries without the placeholder come back canonically rendered but
    otherwise untouched. Gold SQL in generated corpora keeps @JOIN, so
    anything that wants to execute it needs this.
    """
    ast = parse(sql)
    if not ast.join_placeholder:
        return ast.render()
    if g is None:
        g = schema.join_graph()
    referenced = {
        t for t in _top_level_tables(ast, schema) if schema.has_table(t)
    }
    if not referenced:
        raise UnrepairableSql("@JOIN present but no table is referenced")
    path = shortest_join_path(g, referenced)
    tables, joins = _path_to_from(path)
    ast = replace(ast, join_placeholder=False, tables=tables, joins=joins)
    return ast.render()


def postprocess(
    raw_sql: str,
    bindings,
    schema: SchemaBundle,
    g: JoinGraph,
    delta_jac: float = DEFAULT_DELTA_JAC,
) -> tuple[str, list[str]]:
    """Substitute constants, complete the FROM clause, expand @JOIN."""
    log: list[str] = []
    try:
        tokens = tokenize_sql(raw_sql)
    except SqlSyntaxError as exc:
        raise UnrepairableSql(f"model output not tokenizable: {exc}") from exc

    tokens = _substitute(tokens, bindings, schema, delta_jac, log)
    sub_sql = " ".join(tokens)
    try:
        ast = parse(sub_sql)
    except SqlSyntaxError as exc:
        raise UnrepairableSql(f"unparseable after substitution: {exc}") from exc

    referenced = _top_level_tables(ast, schema)
    referenced = {t for t in referenced if schema.has_table(t)}
    if ast.join_placeholder:
        if not referenced:
            raise UnrepairableSql("@JOIN present but no table is referenced")
        path = shortest_join_path(g, referenced)
        tables, joins = _path_to_from(path)
        ast = replace(ast, join_placeholder=False, tables=tables, joins=joins)
        rendered = " ".join([tables[0]] + [j.render() for j in joins])
        log.append(f"@JOIN -> {rendered}")
    else:
        from_tables = set(ast.tables) | {j.table for j in ast.joins}
        from_tables = {t for t in from_tables if schema.has_table(t)}
        missing = referenced - from_tables
        if missing and from_tables:
            path = shortest_join_path(g, from_tables | referenced)
            tables, joins = _path_to_from(path)
            ast = replace(ast, tables=tables, joins=joins)
            for t in sorted(missing):
                log.append(f"added table {t} to FROM")

    final_sql = ast.render()
    try:
        parse(final_sql)
    except SqlSyntaxError as exc:
        raise UnrepairableSql(f"unparseable after repairs: {exc}") from exc
    return final_sql, log


# ----------------------------------------------------------------- driver


@dataclass
class Pipeline:
    """Assembled chain; immutable collaborators, safe to share."""

    schema: SchemaBundle
    model: TranslationModel
    index: ValueIndex | None = None
    delta_jac: float = DEFAULT_DELTA_JAC
    run_queries: bool = True
    graph: JoinGraph = field(init=False)

    def __post_init__(self):
        if self.index is None:
            self.index = ValueIndex(self.schema)
        self.graph = self.schema.join_graph()

    def answer(self, nl: str, k: int = 1) -> TranslationOutcome:
        try:
            tokens, bindings = preprocess(nl, self.schema, self.index)
        except (NlsqlError, ValueError) as exc:
            raise PipelineError("preprocess", exc) from exc

        try:
            ranked = self.model.translate(tokens, k)
        except NlsqlError as exc:
            raise PipelineError("translate", exc) from exc
        if not ranked:
            raise PipelineError(
                "translate", NlsqlError("model returned no candidates")
            )
        raw_sql, score = ranked[0]

        try:
            final_sql, log = postprocess(
                raw_sql, bindings, self.schema, self.graph, self.delta_jac
            )
        except NlsqlError as exc:
            raise PipelineError("postprocess", exc) from exc

        outcome = TranslationOutcome(
            original_nl=nl,
            anonymized_nl=" ".join(tokens),
            bindings=bindings,
            raw_sql=raw_sql,
            repaired_sql=final_sql,
            repairs=log,
            final_sql=final_sql,
            score=score,
        )
        if self.run_queries:
            try:
                outcome.result = execute(parse(final_sql), self.schema)
            except NlsqlError as exc:
                outcome.error = f"execute: {exc}"
        return outcome
