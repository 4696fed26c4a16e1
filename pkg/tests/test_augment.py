"""Augmentation operators: paraphrase windows, word drops, domain phrases."""

from collections import Counter

import pytest

from nlsql.augment import (
    PROTECTED_WORDS,
    ComparativeEntry,
    ComparativeLexicon,
    ParaphraseLexicon,
    augment_corpus,
    augment_pair,
    domain_substitute,
    drop_words,
    load_paraphrases,
    paraphrase,
)
from nlsql.errors import MalformedLine
from nlsql.templates import GeneratorConfig, NlSqlPair, instantiate, template_applicable
from nlsql.textnorm import lemmatize_token

from oracles.ngram_scan import lexicon_windows, single_deletions


def mkpair(nl, sql, placeholders=(), provenance="t#0"):
    return NlSqlPair(nl=nl, sql=sql, placeholders=tuple(placeholders), provenance=provenance)


SPEC_NL = "show me the name of all patient with age @PATIENT.AGE"
SPEC_SQL = "SELECT name FROM patient WHERE age = @PATIENT.AGE"


@pytest.fixture
def spec_pair():
    return mkpair(SPEC_NL, SPEC_SQL, ("@PATIENT.AGE",), "select_where#0")


def drop_banned(pair):
    """Eligibility contract for word drops, rebuilt from the documented rule:
    placeholders, commas, operator words, and words occurring in the SQL
    side's identifiers never get deleted."""
    protected = set(PROTECTED_WORDS)
    for tok in pair.sql.split(" "):
        if tok.startswith("@"):
            protected.add(tok)
        elif tok.isidentifier():
            for word in tok.lower().split("_"):
                protected.add(lemmatize_token(word))
    return lambda tok: tok.startswith("@") or tok == "," or tok in protected


class TestParaphraseLexicon:
    def test_tsv_round_trip(self, tmp_path):
        p = tmp_path / "para.tsv"
        p.write_text(
            "Shows me\tdisplay\t0.9\n"
            "\n"
            "shows me\tlist\t0.95\n",
            encoding="utf-8",
        )
        lex = load_paraphrases(p)
        # lhs is lemmatized into the key, entries ranked by score descending
        assert lex.lookup("show me") == [("list", 0.95), ("display", 0.9)]
        assert len(lex) == 2
        assert lex.max_key_len() == 2

    def test_wrong_field_count(self, tmp_path):
        p = tmp_path / "para.tsv"
        p.write_text("show\tdisplay\n", encoding="utf-8")
        with pytest.raises(MalformedLine, match="3 tab-separated"):
            load_paraphrases(p)

    def test_bad_score(self, tmp_path):
        p = tmp_path / "para.tsv"
        p.write_text("show\tdisplay\thigh\n", encoding="utf-8")
        with pytest.raises(MalformedLine, match="score"):
            load_paraphrases(p)

    def test_placeholder_lhs_rejected(self, tmp_path):
        p = tmp_path / "para.tsv"
        p.write_text("@PATIENT.AGE\tyears\t0.5\n", encoding="utf-8")
        with pytest.raises(MalformedLine):
            load_paraphrases(p)

    def test_empty_lexicon_has_zero_key_len(self):
        assert ParaphraseLexicon({}).max_key_len() == 0

    def test_bundled_comparatives_shape(self, comparatives):
        assert len(comparatives) == 10
        assert any(
            e.generic == "greater than" and e.domain == "age" and e.phrase == "older than"
            for e in comparatives.entries
        )


class TestParaphrase:
    def test_single_word_site(self, spec_pair):
        lex = ParaphraseLexicon({"show": [("display", 0.9)]})
        out = paraphrase(spec_pair, lex, GeneratorConfig(num_para=1))
        assert len(out) == 1
        assert out[0].nl == "display me the name of all patient with age @PATIENT.AGE"
        assert out[0].sql == spec_pair.sql
        assert out[0].provenance == "select_where#0+para(show:0)"

    def test_num_para_zero_disables(self, spec_pair):
        lex = ParaphraseLexicon({"show": [("display", 0.9)]})
        assert paraphrase(spec_pair, lex, GeneratorConfig(num_para=0)) == []

    def test_bigram_site_takes_ranked_hits(self):
        pair = mkpair(
            "what be the maximum age of patient",
            "SELECT MAX ( age ) FROM patient",
        )
        lex = ParaphraseLexicon(
            {"the maximum": [("the highest", 0.9), ("the max", 0.5)]}
        )
        out = paraphrase(pair, lex, GeneratorConfig(num_para=2, size_para=2))
        assert [v.nl for v in out] == [
            "what be the highest age of patient",
            "what be the max age of patient",
        ]
        assert [v.provenance for v in out] == [
            "t#0+para(the maximum:0)",
            "t#0+para(the maximum:1)",
        ]
        # quota of one keeps only the top-scored paraphrase
        top = paraphrase(pair, lex, GeneratorConfig(num_para=1, size_para=2))
        assert [v.nl for v in top] == ["what be the highest age of patient"]

    def test_size_para_caps_window_length(self):
        pair = mkpair("what be the maximum age", "SELECT MAX ( age ) FROM patient")
        lex = ParaphraseLexicon({"the maximum": [("the highest", 0.9)]})
        assert paraphrase(pair, lex, GeneratorConfig(num_para=2, size_para=1)) == []

    def test_min_score_filters_weak_entries(self, spec_pair):
        lex = ParaphraseLexicon({"show": [("display", 0.9), ("flash", 0.3)]})
        cfg = GeneratorConfig(num_para=5, min_para_score=0.5)
        out = paraphrase(spec_pair, lex, cfg)
        assert [v.nl.split(" ")[0] for v in out] == ["display"]

    def test_placeholder_windows_never_match(self, spec_pair):
        lex = ParaphraseLexicon({"age @PATIENT.AGE": [("years @PATIENT.AGE", 1.0)]})
        assert paraphrase(spec_pair, lex, GeneratorConfig(num_para=3, size_para=2)) == []

    def test_each_site_expands_independently(self):
        pair = mkpair("show the list and show the total", "SELECT COUNT ( * ) FROM patient")
        lex = ParaphraseLexicon({"show": [("display", 0.9)]})
        out = paraphrase(pair, lex, GeneratorConfig(num_para=3, size_para=1))
        assert {v.nl for v in out} == {
            "display the list and show the total",
            "show the list and display the total",
        }

    def test_count_matches_window_scan(self, patients_schema, core_templates, phrase_lexicon, paraphrases):
        cfg = GeneratorConfig(
            size_slotfills=40, num_para=2, size_para=2, num_missing=0, randDrop_p=0.0, seed=3
        )
        usable = [
            t for t in core_templates
            if template_applicable(patients_schema, t, phrase_lexicon, cfg)
        ]
        pairs = instantiate(patients_schema, usable, phrase_lexicon, cfg)[:60]
        assert pairs
        max_n = min(cfg.size_para, paraphrases.max_key_len())
        for pair in pairs:
            windows = lexicon_windows(pair.nl.split(" "), set(paraphrases.entries), max_n)
            expected = sum(
                min(cfg.num_para, len(paraphrases.lookup(key))) for _, _, key in windows
            )
            assert len(paraphrase(pair, paraphrases, cfg)) == expected


class TestDropWords:
    def test_known_deletion_emitted(self, spec_pair):
        cfg = GeneratorConfig(num_missing=20, randDrop_p=1.0)
        out = drop_words(spec_pair, cfg)
        assert "show me name of all patient with age @PATIENT.AGE" in {v.nl for v in out}

    def test_exhaustive_when_quota_allows(self, spec_pair):
        cfg = GeneratorConfig(num_missing=20, randDrop_p=1.0)
        out = drop_words(spec_pair, cfg)
        oracle = single_deletions(spec_pair.nl.split(" "), drop_banned(spec_pair))
        assert {v.nl for v in out} == oracle
        assert len(out) == len(oracle) == 6
        for v in out:
            dropped = v.provenance.split("+drop(")[1].rstrip(")")
            assert dropped in spec_pair.nl.split(" ")
            assert "@PATIENT.AGE" in v.nl.split(" ")

    def test_quota_limits_and_is_deterministic(self, spec_pair):
        cfg = GeneratorConfig(num_missing=2, randDrop_p=1.0)
        first = drop_words(spec_pair, cfg)
        assert len(first) == 2
        oracle = single_deletions(spec_pair.nl.split(" "), drop_banned(spec_pair))
        assert {v.nl for v in first} <= oracle
        assert drop_words(spec_pair, cfg) == first

    def test_disabled_settings(self, spec_pair):
        assert drop_words(spec_pair, GeneratorConfig(num_missing=5, randDrop_p=0.0)) == []
        assert drop_words(spec_pair, GeneratorConfig(num_missing=0, randDrop_p=1.0)) == []

    def test_fully_protected_nl(self):
        pair = mkpair("count patient", "SELECT COUNT ( * ) FROM patient")
        assert drop_words(pair, GeneratorConfig(num_missing=9, randDrop_p=1.0)) == []

    def test_commas_survive(self):
        pair = mkpair(
            "for patient with age @PATIENT.AGE , what be their name",
            SPEC_SQL,
            ("@PATIENT.AGE",),
        )
        out = drop_words(pair, GeneratorConfig(num_missing=30, randDrop_p=1.0))
        assert out
        oracle = single_deletions(pair.nl.split(" "), drop_banned(pair))
        for v in out:
            assert "," in v.nl.split(" ")
            assert v.nl in oracle

    def test_gate_fires_at_configured_rate(self):
        cfg = GeneratorConfig(num_missing=1, randDrop_p=0.5)
        fired = 0
        for i in range(300):
            pair = mkpair(f"show row{i} of all patient", "SELECT name FROM patient")
            if drop_words(pair, cfg):
                fired += 1
        assert 0.35 < fired / 300 < 0.65


class TestDomainSubstitute:
    def test_placeholder_site(self, comparatives, patients_schema):
        pair = mkpair(
            "show all patient with age greater than @PATIENT.AGE",
            "SELECT * FROM patient WHERE age > @PATIENT.AGE",
            ("@PATIENT.AGE",),
        )
        out = domain_substitute(pair, comparatives, patients_schema)
        assert len(out) == 1
        assert out[0].nl == "show all patient with age older than @PATIENT.AGE"
        assert out[0].provenance == "t#0+domain(greater than@5)"
        assert out[0].sql == pair.sql

    def test_untagged_column_is_silent(self, comparatives, patients_schema):
        pair = mkpair(
            "show all patient with diagnosis greater than @PATIENT.DIAGNOSIS",
            "SELECT * FROM patient WHERE diagnosis > @PATIENT.DIAGNOSIS",
            ("@PATIENT.DIAGNOSIS",),
        )
        assert domain_substitute(pair, comparatives, patients_schema) == []

    def test_unanchored_phrase_is_silent(self, comparatives, patients_schema):
        pair = mkpair("greater than forty patient", "SELECT name FROM patient WHERE age > 40")
        assert domain_substitute(pair, comparatives, patients_schema) == []

    def test_column_mention_before_phrase(self, comparatives, patients_schema):
        pair = mkpair(
            "patient with age greater than forty",
            "SELECT name FROM patient WHERE age > 40",
        )
        out = domain_substitute(pair, comparatives, patients_schema)
        assert [v.nl for v in out] == ["patient with age older than forty"]

    def test_multiword_surface_anchors(self, comparatives, patients_schema):
        pair = mkpair(
            "patient with length of stay less than ten",
            "SELECT name FROM patient WHERE length_of_stay < 10",
        )
        out = domain_substitute(pair, comparatives, patients_schema)
        assert [v.nl for v in out] == ["patient with length of stay shorter than ten"]

    def test_two_sites_give_two_variants(self, comparatives, patients_schema):
        pair = mkpair(
            "all patient with age greater than @PATIENT.AGE and length of stay"
            " less than @PATIENT.LENGTH_OF_STAY",
            "SELECT * FROM patient WHERE age > @PATIENT.AGE AND"
            " length_of_stay < @PATIENT.LENGTH_OF_STAY",
            ("@PATIENT.AGE", "@PATIENT.LENGTH_OF_STAY"),
        )
        out = domain_substitute(pair, comparatives, patients_schema)
        assert {v.nl for v in out} == {
            "all patient with age older than @PATIENT.AGE and length of stay"
            " less than @PATIENT.LENGTH_OF_STAY",
            "all patient with age greater than @PATIENT.AGE and length of stay"
            " shorter than @PATIENT.LENGTH_OF_STAY",
        }

    def test_custom_entry_drives_phrase(self, patients_schema):
        lex = ComparativeLexicon([ComparativeEntry("greater than", "age", "exceeding")])
        pair = mkpair(
            "patient with age greater than forty",
            "SELECT name FROM patient WHERE age > 40",
        )
        out = domain_substitute(pair, lex, patients_schema)
        assert [v.nl for v in out] == ["patient with age exceeding forty"]


class TestComposition:
    @pytest.fixture(scope="class")
    def instances(self, patients_schema, core_templates, phrase_lexicon):
        cfg = GeneratorConfig(
            size_slotfills=40, num_para=0, num_missing=0, randDrop_p=0.0, seed=3
        )
        return instantiate(patients_schema, core_templates, phrase_lexicon, cfg)[:50]

    @pytest.fixture(scope="class")
    def full_cfg(self):
        return GeneratorConfig(num_para=2, size_para=2, num_missing=2, randDrop_p=1.0)

    def test_original_comes_first(self, spec_pair, paraphrases, comparatives, patients_schema, full_cfg):
        out = augment_pair(spec_pair, paraphrases, comparatives, patients_schema, full_cfg)
        assert out[0] == spec_pair

    def test_none_disables_channel(self, spec_pair, paraphrases, comparatives, patients_schema, full_cfg):
        no_para = augment_pair(spec_pair, None, comparatives, patients_schema, full_cfg)
        assert not any("+para(" in v.provenance for v in no_para)
        no_dom = augment_pair(spec_pair, paraphrases, None, patients_schema, full_cfg)
        assert not any("+domain(" in v.provenance for v in no_dom)

    def test_pair_output_is_channel_concatenation(
        self, instances, paraphrases, comparatives, patients_schema, full_cfg
    ):
        for pair in instances:
            out = augment_pair(pair, paraphrases, comparatives, patients_schema, full_cfg)
            expected = (
                [pair]
                + paraphrase(pair, paraphrases, full_cfg)
                + drop_words(pair, full_cfg)
                + domain_substitute(pair, comparatives, patients_schema)
            )
            assert out == expected

    def test_growth_bound(self, instances, paraphrases, comparatives, patients_schema, full_cfg):
        max_n = min(full_cfg.size_para, paraphrases.max_key_len())
        for pair in instances:
            out = augment_pair(pair, paraphrases, comparatives, patients_schema, full_cfg)
            windows = lexicon_windows(pair.nl.split(" "), set(paraphrases.entries), max_n)
            sites = len(domain_substitute(pair, comparatives, patients_schema))
            bound = 1 + full_cfg.num_para * len(windows) + full_cfg.num_missing + sites
            assert len(out) <= bound

    def test_sql_side_untouched(self, instances, paraphrases, comparatives, patients_schema, full_cfg):
        for pair in instances:
            source_holders = Counter(
                t for t in pair.nl.split(" ") if t.startswith("@")
            )
            for v in augment_pair(pair, paraphrases, comparatives, patients_schema, full_cfg):
                assert v.sql == pair.sql
                assert v.placeholders == pair.placeholders
                assert Counter(t for t in v.nl.split(" ") if t.startswith("@")) == source_holders

    def test_corpus_is_flat_concatenation(
        self, instances, paraphrases, comparatives, patients_schema, full_cfg
    ):
        whole = augment_corpus(instances, paraphrases, comparatives, patients_schema, full_cfg)
        flat = [
            v
            for p in instances
            for v in augment_pair(p, paraphrases, comparatives, patients_schema, full_cfg)
        ]
        assert whole == flat
        assert augment_corpus(instances, paraphrases, comparatives, patients_schema, full_cfg) == whole
