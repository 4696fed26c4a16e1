"""Shared builders for randomized executor and repair tests."""

import random
from fractions import Fraction

from nlsql.corpus import generate_corpus
from nlsql.optimize import fill_constants
from nlsql.schema import ColumnDef, JoinPredicate, SchemaBundle, TableDef
from nlsql.templates import GeneratorConfig
from nlsql.textnorm import stable_hash
from nlsql.valueindex import ValueIndex

FIRST_WORDS = ["amber", "birch", "cedar", "delta", "ember", "fjord", "grove"]
LAST_WORDS = ["north", "south", "east", "west", "upper", "lower"]


def random_database(seed, max_rows=50):
    """Two joinable tables with random names, shapes, and row data.

    Every table gets at least one numeric and one text column so the whole
    template inventory stays fillable, and the fk columns share a value
    pool so joins are usually non-empty.
    """
    rng = random.Random(stable_hash(seed, "randdb"))
    t1, t2 = rng.sample(["vessel", "harbor", "cargo", "crew", "route"], 2)
    link_pool = [f"{a}_{b}" for a in FIRST_WORDS[:4] for b in LAST_WORDS[:3]]

    def rows_for(n_rows, cols, key_pool):
        rows = []
        for _ in range(n_rows):
            row = []
            for col in cols:
                if col.name.endswith("_key"):
                    row.append(rng.choice(key_pool))
                elif col.type == "integer":
                    row.append(rng.randrange(0, 90))
                elif col.type == "real":
                    row.append(round(rng.uniform(0.0, 9.0), 2))
                else:
                    row.append(rng.choice(FIRST_WORDS) + " " + rng.choice(LAST_WORDS))
            rows.append(tuple(row))
        return rows

    cols1 = (
        ColumnDef("label", "text"),
        ColumnDef("size", "integer"),
        ColumnDef("weight", "real"),
        ColumnDef("link_key", "text"),
    )
    cols2 = (
        ColumnDef("link_key", "text"),
        ColumnDef("grade", "integer"),
        ColumnDef("region", "text"),
    )
    tables = (TableDef(t1, cols1), TableDef(t2, cols2))
    edges = (JoinPredicate(t1, "link_key", t2, "link_key"),)
    data = {
        t1: rows_for(rng.randrange(3, max_rows + 1), cols1, link_pool),
        t2: rows_for(rng.randrange(3, max_rows + 1), cols2, link_pool),
    }
    return SchemaBundle(tables=tables, fk_edges=edges, data=data)


def sample_filled_queries(schema, templates, lex, n, seed):
    """Executable SQL strings drawn from template instantiations with
    dummy constants substituted. Augmentation is off; only the SQL side
    matters here."""
    cfg = GeneratorConfig(
        size_slotfills=120, num_para=0, num_missing=0, randDrop_p=0.0, seed=seed
    )
    corpus = generate_corpus(schema, templates, lex, cfg)
    idx = ValueIndex(schema)
    rng = random.Random(stable_hash(seed, "pick"))
    pool = list(corpus.pairs)
    rng.shuffle(pool)
    out = []
    for pair in pool[:n]:
        fill_rng = random.Random(stable_hash(seed, "fill", pair.sql))
        _nl, gold = fill_constants(pair.nl, pair.sql, schema, idx, fill_rng)
        out.append(gold)
    return out


def _row_key(row):
    key = []
    for v in row:
        if isinstance(v, (int, float, Fraction)) and not isinstance(v, bool):
            key.append((0, float(v)))
        else:
            key.append((1, str(v)))
    return tuple(key)


def results_match(cols_a, rows_a, cols_b, rows_b, tol=1e-9):
    """Independent multiset comparison with numeric tolerance."""
    if list(cols_a) != list(cols_b):
        return False
    if len(rows_a) != len(rows_b):
        return False
    sa = sorted(rows_a, key=_row_key)
    sb = sorted(rows_b, key=_row_key)
    for ra, rb in zip(sa, sb):
        if len(ra) != len(rb):
            return False
        for va, vb in zip(ra, rb):
            a_num = isinstance(va, (int, float, Fraction)) and not isinstance(va, bool)
            b_num = isinstance(vb, (int, float, Fraction)) and not isinstance(vb, bool)
            if a_num != b_num:
                return False
            if a_num:
                if abs(Fraction(va) - Fraction(vb)) > tol:
                    return False
            elif va != vb:
                return False
    return True
