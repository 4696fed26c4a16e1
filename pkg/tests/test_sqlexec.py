"""Query executor semantics against the nested-loop reference."""

from fractions import Fraction

import pytest

from helpers import random_database, results_match, sample_filled_queries
from oracles.naive_sql import naive_execute
from nlsql.errors import SqlSyntaxError, TypeMismatch, UnboundPlaceholder, UnknownIdentifier
from nlsql.schema import ColumnDef, SchemaBundle, TableDef
from nlsql.sqlexec import (
    ResultTable,
    execute,
    plain_value,
    relaxed_correct,
    rows_equal_multiset,
    values_equal,
)
from nlsql.sqlparser import parse


def toy_bundle():
    return SchemaBundle(
        tables=(
            TableDef("t", (ColumnDef("name", "text"), ColumnDef("age", "integer"))),
        ),
        fk_edges=(),
        data={"t": [("a", 3), ("b", 5), ("c", 4)]},
    )


class TestBasics:
    def test_filter_and_projection(self):
        r = execute(parse("SELECT name FROM t WHERE age > 3"), toy_bundle())
        assert r.columns == ["t.name"]
        assert sorted(r.rows) == [("b",), ("c",)]

    def test_avg_is_exact_rational(self):
        r = execute(parse("SELECT AVG ( age ) FROM t WHERE age > 3"), toy_bundle())
        assert r.rows == [(Fraction(9, 2),)]

    def test_sum_collapses_to_int_when_whole(self):
        r = execute(parse("SELECT SUM ( age ) FROM t"), toy_bundle())
        assert r.rows == [(12,)]
        assert isinstance(r.rows[0][0], int)

    def test_count_on_empty_filter_returns_zero_row(self):
        r = execute(parse("SELECT COUNT ( * ) FROM t WHERE age > 99"), toy_bundle())
        assert r.rows == [(0,)]

    def test_min_max_on_empty_input_yield_no_rows(self):
        r = execute(parse("SELECT MAX ( age ) FROM t WHERE age > 99"), toy_bundle())
        assert r.rows == []

    def test_distinct(self):
        bundle = SchemaBundle(
            tables=(TableDef("t", (ColumnDef("d", "text"),)),),
            fk_edges=(),
            data={"t": [("flu",), ("flu",), ("cold",)]},
        )
        r = execute(parse("SELECT DISTINCT d FROM t"), bundle)
        assert sorted(r.rows) == [("cold",), ("flu",)]

    def test_empty_scalar_subquery_filters_everything(self):
        sql = "SELECT name FROM t WHERE age = ( SELECT MAX ( age ) FROM t WHERE age < 3 )"
        assert execute(parse(sql), toy_bundle()).rows == []


class TestValidation:
    def test_unknown_column(self):
        with pytest.raises(UnknownIdentifier):
            execute(parse("SELECT ghost FROM t"), toy_bundle())

    def test_unknown_table(self):
        with pytest.raises(UnknownIdentifier):
            execute(parse("SELECT name FROM nowhere"), toy_bundle())

    def test_bare_column_mixed_with_aggregate(self):
        with pytest.raises(SqlSyntaxError):
            execute(parse("SELECT name , AVG ( age ) FROM t"), toy_bundle())

    def test_selected_column_must_be_grouped(self):
        sql = "SELECT name , COUNT ( * ) FROM t GROUP BY age"
        with pytest.raises(SqlSyntaxError):
            execute(parse(sql), toy_bundle())

    def test_text_number_comparison_raises(self):
        with pytest.raises(TypeMismatch):
            execute(parse("SELECT name FROM t WHERE name > 2"), toy_bundle())

    def test_join_placeholder_is_unbound(self):
        with pytest.raises(UnboundPlaceholder):
            execute(parse("SELECT * FROM @JOIN WHERE t.age = 1"), toy_bundle())

    def test_ambiguous_column_across_joined_tables(self):
        db = random_database(0)
        t1, t2 = db.table_names()
        sql = (
            f"SELECT link_key FROM {t1} JOIN {t2} "
            f"ON {t1}.link_key = {t2}.link_key"
        )
        with pytest.raises(UnknownIdentifier):
            execute(parse(sql), db)


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_queries_match_reference(self, seed, core_templates, phrase_lexicon):
        db = random_database(seed)
        queries = sample_filled_queries(db, core_templates, phrase_lexicon, 40, seed)
        assert len(queries) == 40
        for sql in queries:
            ast = parse(sql)
            got = execute(ast, db)
            want_cols, want_rows = naive_execute(ast, db)
            assert results_match(got.columns, got.rows, want_cols, want_rows), sql


class TestComparisonHelpers:
    def test_values_equal_within_tolerance(self):
        assert values_equal(1.0, 1.0 + 1e-12)
        assert not values_equal(1.0, 1.0 + 1e-6)
        assert not values_equal("1", 1)

    def test_rows_equal_multiset_ignores_order(self):
        assert rows_equal_multiset([(1,), (2,)], [(2,), (1,)])
        assert not rows_equal_multiset([(1,), (1,)], [(1,), (2,)])
        assert not rows_equal_multiset([(1,)], [(1,), (1,)])

    def test_plain_value(self):
        assert plain_value(Fraction(4, 1)) == 4
        assert plain_value(Fraction(3, 2)) == 1.5
        assert plain_value("x") == "x"

    def test_result_table_guards_arity(self):
        with pytest.raises(ValueError):
            ResultTable(columns=["a"], rows=[(1, 2)])


class TestRelaxedCorrect:
    def test_identical_results(self):
        g = execute(parse("SELECT name FROM t WHERE age > 3"), toy_bundle())
        assert relaxed_correct(g, g)

    def test_superset_columns_still_correct(self):
        predicted = execute(parse("SELECT * FROM t WHERE age > 3"), toy_bundle())
        gold = execute(parse("SELECT name FROM t WHERE age > 3"), toy_bundle())
        assert relaxed_correct(predicted, gold)

    def test_missing_gold_column_fails(self):
        predicted = execute(parse("SELECT name FROM t"), toy_bundle())
        gold = execute(parse("SELECT * FROM t"), toy_bundle())
        assert not relaxed_correct(predicted, gold)

    def test_row_mismatch_fails(self):
        predicted = execute(parse("SELECT name FROM t WHERE age > 4"), toy_bundle())
        gold = execute(parse("SELECT name FROM t WHERE age > 3"), toy_bundle())
        assert not relaxed_correct(predicted, gold)
