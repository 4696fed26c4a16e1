"""Constant classification: exact postings, numeric ranges, centroids."""

import pytest

from oracles.similarity import cosine
from nlsql.errors import MalformedSchema, NoCandidateColumn
from nlsql.schema import ColumnDef, SchemaBundle, TableDef
from nlsql.valueindex import (
    DEFAULT_TAU_EMBED,
    ValueIndex,
    classify_constant,
    load_embeddings,
)


def ward_bundle(extra_row=None):
    rows = [
        ("alpha", 12, 2),
        ("bravo", 15, 4),
        ("carol", 20, 5),
    ]
    if extra_row:
        rows = rows + [extra_row]
    return SchemaBundle(
        tables=(
            TableDef(
                "ward",
                (
                    ColumnDef("label", "text"),
                    ColumnDef("age", "integer"),
                    ColumnDef("beds", "integer"),
                ),
            ),
        ),
        fk_edges=(),
        data={"ward": rows},
    )


class TestExactMatch:
    def test_stored_value_scores_one(self, patients_schema):
        idx = ValueIndex(patients_schema)
        top = idx.classify("flu")[0]
        assert top == ("patient", "diagnosis", 1.0)

    def test_normalization_applies_before_lookup(self, patients_schema):
        idx = ValueIndex(patients_schema)
        assert idx.classify("  FLU ")[0] == ("patient", "diagnosis", 1.0)

    def test_exact_outranks_embedding(self, city_schema, mini_embeddings):
        idx = ValueIndex(city_schema, embeddings=mini_embeddings)
        results = idx.classify("Boston")
        assert results[0] == ("city", "name", 1.0)

    def test_alias_function_matches_method(self, patients_schema):
        idx = ValueIndex(patients_schema)
        assert classify_constant(idx, "flu") == idx.classify("flu")


class TestNumeric:
    def test_number_candidates_are_numeric_columns(self, patients_schema):
        idx = ValueIndex(patients_schema)
        numeric = {"age", "length_of_stay"}
        for table, column, score in idx.classify("80"):
            if score < 1.0:
                assert column in numeric
            assert patients_schema.table(table).column(column).is_numeric or score == 1.0

    def test_in_range_beats_out_of_range(self):
        idx = ValueIndex(ward_bundle())
        ranked = idx.classify("3")
        assert ranked[0] == ("ward", "beds", 0.6)
        assert ("ward", "age", 0.4) in ranked

    def test_no_numeric_columns_raises(self):
        bundle = SchemaBundle(
            tables=(TableDef("t", (ColumnDef("x", "text"),)),),
            fk_edges=(),
            data={"t": [("a",)]},
        )
        with pytest.raises(NoCandidateColumn):
            ValueIndex(bundle).classify("42")


class TestCentroidFallback:
    def test_unseen_city_lands_on_name_column(self, city_schema, mini_embeddings):
        idx = ValueIndex(city_schema, embeddings=mini_embeddings)
        table, column, score = idx.classify("NYC")[0]
        assert (table, column) == ("city", "name")
        assert score >= DEFAULT_TAU_EMBED

    def test_score_matches_brute_force_cosine(self, city_schema, mini_embeddings):
        idx = ValueIndex(city_schema, embeddings=mini_embeddings)
        got = idx.classify("NYC")[0][2]
        names = city_schema.column_values("city", "name")
        vectors = [mini_embeddings[n.lower()] for n in names]
        centroid = [sum(col) / len(col) for col in zip(*vectors)]
        expected = cosine(mini_embeddings["nyc"], centroid)
        assert got == pytest.approx(expected, abs=1e-12)

    def test_below_threshold_raises(self, city_schema, mini_embeddings):
        idx = ValueIndex(city_schema, embeddings=mini_embeddings)
        with pytest.raises(NoCandidateColumn):
            idx.classify("big apple")

    def test_tau_override_admits_weak_matches(self, city_schema, mini_embeddings):
        idx = ValueIndex(city_schema, embeddings=mini_embeddings)
        table, column, score = idx.classify("big apple", tau=0.1)[0]
        assert (table, column) == ("city", "name")
        assert 0.1 <= score < DEFAULT_TAU_EMBED

    def test_trigram_fallback_catches_misspellings(self, city_schema):
        idx = ValueIndex(city_schema)
        table, column, score = idx.classify("bostn")[0]
        assert (table, column) == ("city", "name")
        assert score >= DEFAULT_TAU_EMBED

    def test_classification_is_deterministic(self, city_schema, mini_embeddings):
        idx = ValueIndex(city_schema, embeddings=mini_embeddings)
        assert idx.classify("NYC") == idx.classify("NYC")


class TestRebuild:
    def test_insert_adds_only_new_postings(self):
        before = ValueIndex(ward_bundle())
        after = ValueIndex(ward_bundle(extra_row=("delta", 15, 4)))
        assert len(after) == len(before) + 1  # 15 and 4 already posted
        assert after.exact_origins("delta") == [("ward", "label")]

    def test_unaffected_centroids_survive_insert(self, mini_embeddings):
        def two_col(rows):
            return SchemaBundle(
                tables=(
                    TableDef(
                        "place",
                        (ColumnDef("name", "text"), ColumnDef("kind", "text")),
                    ),
                ),
                fk_edges=(),
                data={"place": rows},
            )

        a = ValueIndex(two_col([("boston", "city"), ("denver", "city")]), embeddings=mini_embeddings)
        b = ValueIndex(
            two_col([("boston", "city"), ("denver", "city"), ("york", "city")]),
            embeddings=mini_embeddings,
        )
        # kind's distinct values did not change, so its centroid must not move
        assert a.centroids[("place", "kind")] == b.centroids[("place", "kind")]
        assert a.centroids[("place", "name")] != b.centroids[("place", "name")]


class TestLoadEmbeddings:
    def test_bad_float_raises(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("word 1.0 not_a_number\n")
        with pytest.raises(MalformedSchema):
            load_embeddings(path)

    def test_dimension_mismatch_raises(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("a 1.0 2.0\nb 1.0\n")
        with pytest.raises(MalformedSchema):
            load_embeddings(path)

    def test_word_with_no_components_raises(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("lonely\n")
        with pytest.raises(MalformedSchema):
            load_embeddings(path)

    def test_round_trip(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("a 1.0 2.0\nb 0.5 0.25\n")
        emb = load_embeddings(path)
        assert emb["a"] == [1.0, 2.0]
        assert emb["b"] == [0.5, 0.25]
