"""SQL subset parser: canonical round trips and error positions."""

import pytest
from hypothesis import given, strategies as st

from nlsql.errors import SqlSyntaxError
from nlsql.sqlparser import (
    Aggregate,
    And,
    ColumnRef,
    Comparison,
    InPredicate,
    Literal,
    Or,
    Select,
    Star,
    parse,
    render,
    tokenize_sql,
)


class TestTokenize:
    def test_quoted_strings_stay_whole(self):
        toks = tokenize_sql("SELECT name FROM t WHERE x = 'a b c'")
        assert toks[-1] == "'a b c'"

    def test_parens_and_commas_split(self):
        toks = tokenize_sql("SELECT AVG ( age ) , name FROM t")
        assert toks == ["SELECT", "AVG", "(", "age", ")", ",", "name", "FROM", "t"]


class TestParse:
    def test_simple_where(self):
        ast = parse("SELECT name FROM patient WHERE age = 80")
        assert ast.items == (ColumnRef(None, "name"),)
        assert ast.tables == ("patient",)
        assert ast.where == Comparison(ColumnRef(None, "age"), "=", Literal("80"))

    def test_join_clause_fields(self):
        ast = parse(
            "SELECT AVG ( patient.age ) FROM patient "
            "JOIN doctor ON patient.doctor = doctor.name"
        )
        assert ast.tables == ("patient", "doctor")
        assert len(ast.joins) == 1
        assert ast.joins[0].table == "doctor"
        assert ast.items[0] == Aggregate("AVG", ColumnRef("patient", "age"))

    def test_join_placeholder_flag(self):
        ast = parse("SELECT * FROM @JOIN WHERE city.state = 'ohio'")
        assert ast.join_placeholder
        assert ast.tables == ()
        assert ast.items == (Star(),)

    def test_nested_in_predicate(self):
        ast = parse(
            "SELECT name FROM mountain WHERE state NOT IN "
            "( SELECT state FROM city WHERE population > 150000 )"
        )
        assert isinstance(ast.where, InPredicate)
        assert ast.where.negated
        assert ast.where.query.tables == ("city",)

    def test_or_binds_looser_than_and(self):
        ast = parse("SELECT name FROM t WHERE ( a = 1 OR a = 2 ) AND b = 3")
        assert isinstance(ast.where, And)
        assert isinstance(ast.where.parts[0], Or)

    def test_group_by_and_distinct(self):
        ast = parse("SELECT DISTINCT diagnosis FROM patient")
        assert ast.distinct
        ast = parse("SELECT diagnosis , AVG ( age ) FROM patient GROUP BY diagnosis")
        assert ast.group_by == (ColumnRef(None, "diagnosis"),)

    def test_placeholder_literal(self):
        ast = parse("SELECT name FROM patient WHERE age = @PATIENT.AGE")
        assert ast.where.right.is_placeholder
        assert ast.where.right.value() == "@PATIENT.AGE"

    def test_literal_value_coercion(self):
        assert Literal("80").value() == 80
        assert Literal("3.5").value() == 3.5
        assert Literal("'flu'").value() == "flu"


class TestErrors:
    def test_missing_select_list_reports_token_two(self):
        with pytest.raises(SqlSyntaxError) as exc:
            parse("SELECT FROM patient")
        assert "token 2" in str(exc.value)

    def test_empty_input(self):
        with pytest.raises(SqlSyntaxError) as exc:
            parse("")
        assert "empty input" in str(exc.value)

    def test_truncated_where(self):
        with pytest.raises(SqlSyntaxError) as exc:
            parse("SELECT name FROM t WHERE age =")
        assert "end of input" in str(exc.value)

    def test_unknown_leading_keyword(self):
        with pytest.raises(SqlSyntaxError):
            parse("DROP TABLE patient")

    def test_unbalanced_paren(self):
        with pytest.raises(SqlSyntaxError):
            parse("SELECT AVG ( age FROM t")


CANONICAL_STRINGS = [
    "SELECT name FROM patient WHERE age = 80",
    "SELECT * FROM patient WHERE diagnosis = 'flu' AND age > 60",
    "SELECT DISTINCT diagnosis FROM patient",
    "SELECT diagnosis , AVG ( age ) FROM patient GROUP BY diagnosis",
    "SELECT COUNT ( * ) FROM patient WHERE length_of_stay >= 2",
    "SELECT name FROM patient WHERE age = ( SELECT MAX ( age ) FROM patient )",
    "SELECT name FROM mountain WHERE state IN ( SELECT state FROM city )",
    "SELECT name FROM t WHERE ( a = 1 OR a = 2 ) AND b = 3",
    "SELECT * FROM @JOIN WHERE city.state = 'ohio'",
    "SELECT AVG ( patient.age ) FROM patient "
    "JOIN doctor ON patient.doctor = doctor.name WHERE doctor.name = 'kim'",
]


class TestRoundTrip:
    @pytest.mark.parametrize("text", CANONICAL_STRINGS)
    def test_render_after_parse_is_identity(self, text):
        assert render(parse(text)) == text

    def test_parse_after_render_is_identity(self):
        for text in CANONICAL_STRINGS:
            ast = parse(text)
            assert parse(render(ast)) == ast

    def test_whole_corpus_sql_round_trips(self, plain_corpus):
        for pair in plain_corpus.pairs:
            assert render(parse(pair.sql)) == pair.sql


# hypothesis strategy over a conservative slice of the AST space
_columns = st.sampled_from(
    [ColumnRef(None, "age"), ColumnRef(None, "name"), ColumnRef("t", "size")]
)
_literals = st.sampled_from(
    [Literal("1"), Literal("80"), Literal("3.5"), Literal("'flu'"), Literal("@T.C")]
)
_comparisons = st.builds(
    Comparison,
    _columns,
    st.sampled_from(["=", "<", ">", "<=", ">=", "<>"]),
    _literals,
)
_conditions = st.one_of(
    _comparisons,
    st.builds(lambda ps: And(tuple(ps)), st.lists(_comparisons, min_size=2, max_size=3)),
    st.builds(lambda ps: Or(tuple(ps)), st.lists(_comparisons, min_size=2, max_size=3)),
)
_items = st.one_of(
    st.tuples(st.sampled_from([Star()])),
    st.lists(_columns, min_size=1, max_size=2, unique=True).map(tuple),
    st.tuples(st.builds(Aggregate, st.sampled_from(["COUNT", "SUM", "AVG", "MIN", "MAX"]), _columns)),
)


@given(_items, st.one_of(st.none(), _conditions))
def test_generated_asts_survive_render_parse(items, where):
    ast = Select(items=items, tables=("t",), where=where)
    assert parse(render(ast)) == ast
