"""Tokenizer, AST, recursive-descent parser, and canonical renderer for the
SQL subset the templates emit.

Grammar (keywords case-insensitive on input, uppercase on output):

    query    := SELECT [DISTINCT] items FROM from [WHERE cond] [GROUP BY cols]
    items    := item ("," item)* | "*"
    item     := column | AGG "(" (column | "*") ")"
    from     := "@JOIN" | table (JOIN table ON column cmp column)*
    cond     := conj (OR conj)*
    conj     := pred (AND pred)*
    pred     := "(" cond ")" | [NOT] EXISTS "(" query ")"
              | operand [NOT] IN "(" query ")" | operand cmp operand
    operand  := column | number | string | placeholder | "(" query ")"
    cmp      := "=" | "<>" | "<" | "<=" | ">" | ">="

No NULLs, aliases, HAVING, ORDER BY, LIMIT, or set operations. Rendering is
a canonical single-space token stream so string equality is meaningful.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SqlSyntaxError
from .textnorm import JOIN_TOKEN

KEYWORDS = {
    "SELECT", "DISTINCT", "FROM", "WHERE", "GROUP", "BY",
    "JOIN", "ON", "AND", "OR", "NOT", "IN", "EXISTS",
}
AGG_FUNCS = ("COUNT", "SUM", "AVG", "MIN", "MAX")
COMPARE_OPS = ("=", "<>", "<", "<=", ">", ">=")

_SQL_TOKEN_RE = re.compile(
    r"\s*("
    r"@[A-Za-z_][A-Za-z_0-9]*(?:\.[A-Za-z_][A-Za-z_0-9]*)?"  # placeholder / @JOIN
    r"|'[^']*'"
    r"|[A-Za-z_][A-Za-z_0-9]*(?:\.[A-Za-z_][A-Za-z_0-9]*)?"  # ident / qualified / kw
    r"|\d+\.\d+|\d+"
    r"|<>|<=|>=|[=<>(),*]"
    r")"
)


def tokenize_sql(text: str) -> list[str]:
    """Split SQL text into canonical tokens; errors carry 1-based positions."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _SQL_TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise SqlSyntaxError(
                f"unrecognized character {text[pos:].strip()[0]!r} "
                f"after token {len(tokens)}"
            )
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


# ---------------------------------------------------------------- AST types


@dataclass(frozen=True)
class ColumnRef:
    table: str | None
    column: str

    def render(self) -> str:
        if self.table is None:
            return self.column
        return f"{self.table}.{self.column}"


@dataclass(frozen=True)
class Star:
    def render(self) -> str:
        return "*"


@dataclass(frozen=True)
class Aggregate:
    func: str
    arg: ColumnRef | Star

    def render(self) -> str:
        return f"{self.func} ( {self.arg.render()} )"


@dataclass(frozen=True)
class Literal:
    """A number, quoted string, or placeholder; `text` is the exact lexeme."""

    text: str

    @property
    def is_string(self) -> bool:
        return self.text.startswith("'")

    @property
    def is_placeholder(self) -> bool:
        return self.text.startswith("@")

    def value(self):
        if self.is_string:
            return self.text[1:-1]
        if self.is_placeholder:
            return self.text
        return float(self.text) if "." in self.text else int(self.text)

    def render(self) -> str:
        return self.text


@dataclass(frozen=True)
class Comparison:
    left: "Operand"
    op: str
    right: "Operand"

    def render(self) -> str:
        return f"{_render_operand(self.left)} {self.op} {_render_operand(self.right)}"


@dataclass(frozen=True)
class InPredicate:
    operand: "Operand"
    query: "Select"
    negated: bool = False

    def render(self) -> str:
        kw = "NOT IN" if self.negated else "IN"
        return f"{_render_operand(self.operand)} {kw} ( {self.query.render()} )"


@dataclass(frozen=True)
class ExistsPredicate:
    query: "Select"
    negated: bool = False

    def render(self) -> str:
        kw = "NOT EXISTS" if self.negated else "EXISTS"
        return f"{kw} ( {self.query.render()} )"


@dataclass(frozen=True)
class And:
    parts: tuple

    def render(self) -> str:
        return " AND ".join(_render_cond_part(p, parent="AND") for p in self.parts)


@dataclass(frozen=True)
class Or:
    parts: tuple

    def render(self) -> str:
        return " OR ".join(_render_cond_part(p, parent="OR") for p in self.parts)


@dataclass(frozen=True)
class JoinClause:
    table: str
    left: ColumnRef
    right: ColumnRef

    def render(self) -> str:
        return f"JOIN {self.table} ON {self.left.render()} = {self.right.render()}"


@dataclass(frozen=True)
class Select:
    items: tuple
    tables: tuple[str, ...]
    joins: tuple[JoinClause, ...] = ()
    where: object | None = None
    group_by: tuple[ColumnRef, ...] = ()
    distinct: bool = False
    join_placeholder: bool = field(default=False)

    def render(self) -> str:
        parts = ["SELECT"]
        if self.distinct:
            parts.append("DISTINCT")
        parts.append(" , ".join(it.render() for it in self.items))
        parts.append("FROM")
        if self.join_placeholder:
            parts.append(JOIN_TOKEN)
        else:
            from_text = self.tables[0]
            for j in self.joins:
                from_text += " " + j.render()
            parts.append(from_text)
        if self.where is not None:
            parts.append("WHERE")
            parts.append(_render_cond_part(self.where, parent=None))
        if self.group_by:
            parts.append("GROUP BY")
            parts.append(" , ".join(c.render() for c in self.group_by))
        return " ".join(parts)


Operand = ColumnRef | Literal | Select


def _render_operand(op) -> str:
    if isinstance(op, Select):
        return f"( {op.render()} )"
    return op.render()


def _render_cond_part(node, parent: str | None) -> str:
    # OR binds looser than AND; parenthesize whenever nesting would reassociate.
    if isinstance(node, Or) and parent is not None:
        return f"( {node.render()} )"
    if isinstance(node, And) and parent == "AND":
        return f"( {node.render()} )"
    return node.render()


# ------------------------------------------------------------------ parser


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.i = 0

    # position reporting is 1-based over the token stream
    def _err(self, expected: str):
        pos = self.i + 1
        got = self.tokens[self.i] if self.i < len(self.tokens) else "end of input"
        raise SqlSyntaxError(f"expected {expected} at token {pos}, got {got!r}")

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def peek_kw(self) -> str | None:
        tok = self.peek()
        if tok is not None and tok.upper() in KEYWORDS | set(AGG_FUNCS):
            return tok.upper()
        return None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            self._err("a token")
        self.i += 1
        return tok

    def expect_kw(self, kw: str) -> None:
        tok = self.peek()
        if tok is None or tok.upper() != kw:
            self._err(kw)
        self.i += 1

    def at_kw(self, kw: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.upper() == kw

    def accept_kw(self, kw: str) -> bool:
        if self.at_kw(kw):
            self.i += 1
            return True
        return False

    # --- terminals

    def ident(self, what: str) -> str:
        tok = self.peek()
        if tok is None or not re.fullmatch(r"[a-z_][a-z_0-9]*", tok):
            self._err(what)
        self.i += 1
        return tok

    def column_ref(self) -> ColumnRef:
        tok = self.peek()
        if tok is None:
            self._err("column reference")
        m = re.fullmatch(r"([a-z_][a-z_0-9]*)\.([a-z_][a-z_0-9]*)", tok)
        if m:
            self.i += 1
            return ColumnRef(m.group(1), m.group(2))
        if re.fullmatch(r"[a-z_][a-z_0-9]*", tok) and tok.upper() not in KEYWORDS:
            self.i += 1
            return ColumnRef(None, tok)
        self._err("column reference")

    # --- productions

    def query(self) -> Select:
        self.expect_kw("SELECT")
        distinct = self.accept_kw("DISTINCT")
        items = self.select_items()
        self.expect_kw("FROM")
        tables: list[str] = []
        joins: list[JoinClause] = []
        join_ph = False
        if self.peek() == JOIN_TOKEN:
            self.take()
            join_ph = True
        else:
            tables.append(self.ident("table name"))
            while self.accept_kw("JOIN"):
                t = self.ident("table name")
                self.expect_kw("ON")
                left = self.column_ref()
                if self.peek() != "=":
                    self._err("=")
                self.take()
                right = self.column_ref()
                tables.append(t)
                joins.append(JoinClause(t, left, right))
        where = None
        if self.accept_kw("WHERE"):
            where = self.condition()
        group_by: tuple[ColumnRef, ...] = ()
        if self.accept_kw("GROUP"):
            self.expect_kw("BY")
            cols = [self.column_ref()]
            while self.peek() == ",":
                self.take()
                cols.append(self.column_ref())
            group_by = tuple(cols)
        return Select(
            items=tuple(items),
            tables=tuple(tables),
            joins=tuple(joins),
            where=where,
            group_by=group_by,
            distinct=distinct,
            join_placeholder=join_ph,
        )

    def select_items(self) -> list:
        if self.peek() == "*":
            self.take()
            return [Star()]
        items = [self.select_item()]
        while self.peek() == ",":
            self.take()
            items.append(self.select_item())
        return items

    def select_item(self):
        tok = self.peek()
        if tok is not None and tok.upper() in AGG_FUNCS:
            func = self.take().upper()
            if self.peek() != "(":
                self._err("(")
            self.take()
            arg: ColumnRef | Star
            if self.peek() == "*":
                self.take()
                arg = Star()
            else:
                arg = self.column_ref()
            if self.peek() != ")":
                self._err(")")
            self.take()
            return Aggregate(func, arg)
        return self.column_ref()

    def condition(self):
        parts = [self.conjunction()]
        while self.accept_kw("OR"):
            parts.append(self.conjunction())
        if len(parts) == 1:
            return parts[0]
        return Or(tuple(parts))

    def conjunction(self):
        parts = [self.predicate()]
        while self.accept_kw("AND"):
            parts.append(self.predicate())
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts))

    def predicate(self):
        if self.at_kw("NOT"):
            self.take()
            if self.at_kw("EXISTS"):
                self.take()
                return ExistsPredicate(self._parenthesized_query(), negated=True)
            # NOT only prefixes EXISTS or follows an operand before IN
            self._err("EXISTS")
        if self.at_kw("EXISTS"):
            self.take()
            return ExistsPredicate(self._parenthesized_query())
        if self.peek() == "(" and not self._lookahead_is_query():
            self.take()
            inner = self.condition()
            if self.peek() != ")":
                self._err(")")
            self.take()
            return inner
        operand = self.operand()
        if self.at_kw("IN"):
            self.take()
            return InPredicate(operand, self._parenthesized_query())
        if self.at_kw("NOT"):
            self.take()
            self.expect_kw("IN")
            return InPredicate(operand, self._parenthesized_query(), negated=True)
        tok = self.peek()
        if tok in COMPARE_OPS:
            op = self.take()
            right = self.operand()
            return Comparison(operand, op, right)
        self._err("comparison operator, IN, or NOT IN")

    def _lookahead_is_query(self) -> bool:
        nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
        return nxt is not None and nxt.upper() == "SELECT"

    def _parenthesized_query(self) -> Select:
        if self.peek() != "(":
            self._err("(")
        self.take()
        q = self.query()
        if self.peek() != ")":
            self._err(")")
        self.take()
        return q

    def operand(self):
        tok = self.peek()
        if tok is None:
            self._err("operand")
        if tok == "(" and self._lookahead_is_query():
            return self._parenthesized_query()
        if tok.startswith("'") or tok.startswith("@") or re.fullmatch(r"\d+(\.\d+)?", tok):
            self.take()
            return Literal(tok)
        return self.column_ref()


def parse(sql: str) -> Select:
    """Parse SQL text; raises SqlSyntaxError with a 1-based token position."""
    tokens = tokenize_sql(sql)
    if not tokens:
        raise SqlSyntaxError("empty input")
    p = _Parser(tokens)
    ast = p.query()
    if p.i != len(tokens):
        p._err("end of input")
    return ast


def render(ast: Select) -> str:
    """Canonical token-stream rendering; parse(render(x)) == x."""
    return ast.render()
