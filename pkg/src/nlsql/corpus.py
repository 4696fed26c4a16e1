"""Corpus persistence, deduplication, stratified splitting, and the
inverted token index shared by the retrieval translator and autocompleter.

Disk layout is a two-column UTF-8 TSV, `nl TAB sql`, one pair per line.
Provenance is an in-memory notion only; pairs read back from disk carry an
empty provenance and therefore form a single split stratum.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from pathlib import Path

from .augment import ComparativeLexicon, ParaphraseLexicon, augment_corpus
from .errors import MalformedLine, SlotUnfillable
from .schema import SchemaBundle
from .templates import (
    GeneratorConfig,
    NlSqlPair,
    TemplatePair,
    instantiate,
    template_applicable,
)
from .textnorm import stable_hash


@dataclass
class Corpus:
    pairs: list[NlSqlPair]
    stats: dict = field(default_factory=dict)
    _index: dict[str, list[int]] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return [(p.nl, p.sql) for p in self.pairs] == [
            (p.nl, p.sql) for p in other.pairs
        ]

    @property
    def token_index(self) -> dict[str, list[int]]:
        """Inverted index: NL token → sorted list of pair ids."""
        if self._index is None:
            index: dict[str, list[int]] = {}
            for i, p in enumerate(self.pairs):
                for tok in set(p.nl.split(" ")):
                    index.setdefault(tok, []).append(i)
            self._index = index
        return self._index

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for p in self.pairs:
            h.update(p.nl.encode("utf-8"))
            h.update(b"\t")
            h.update(p.sql.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


def build_corpus(pairs: list[NlSqlPair]) -> Corpus:
    """Deduplicate exact (nl, sql) repeats, then resolve NL collisions
    (same NL, different SQL) by keeping the first occurrence. Collisions
    would otherwise make the corpus an inconsistent function NL → SQL."""
    seen_exact: set[tuple[str, str]] = set()
    nl_to_sql: dict[str, str] = {}
    kept: list[NlSqlPair] = []
    dup = 0
    conflicts = 0
    for p in pairs:
        key = (p.nl, p.sql)
        if key in seen_exact:
            dup += 1
            continue
        if p.nl in nl_to_sql:
            conflicts += 1
            continue
        seen_exact.add(key)
        nl_to_sql[p.nl] = p.sql
        kept.append(p)
    per_template: dict[str, int] = {}
    for p in kept:
        tid = p.template_id
        per_template[tid] = per_template.get(tid, 0) + 1
    stats = {
        "pairs": len(kept),
        "duplicates_dropped": dup,
        "nl_conflicts_dropped": conflicts,
        "per_template": dict(sorted(per_template.items())),
    }
    return Corpus(pairs=kept, stats=stats)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    lines = [f"{p.nl}\t{p.sql}" for p in corpus.pairs]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_corpus(path: str | Path) -> Corpus:
    pairs: list[NlSqlPair] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedLine(
                f"{path}:{lineno}: expected 2 tab-separated fields, "
                f"got {len(parts)}"
            )
        nl, sql = parts
        if not nl or not sql:
            raise MalformedLine(f"{path}:{lineno}: empty field")
        placeholders = tuple(
            tok for tok in sql.split(" ") if tok.startswith("@") and tok != "@JOIN"
        )
        pairs.append(
            NlSqlPair(nl=nl, sql=sql, placeholders=placeholders, provenance="")
        )
    corpus = Corpus(pairs=pairs)
    corpus.stats = {"pairs": len(pairs)}
    return corpus


def split_corpus(
    corpus: Corpus, test_fraction: float, seed: int
) -> tuple[Corpus, Corpus]:
    """Disjoint, exhaustive, seeded split, stratified by template id so
    rare query classes land in both halves."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be strictly between 0 and 1")
    strata: dict[str, list[int]] = {}
    for i, p in enumerate(corpus.pairs):
        strata.setdefault(p.template_id, []).append(i)
    test_ids: set[int] = set()
    for key in sorted(strata):
        members = strata[key]
        rng = random.Random(stable_hash(seed, "split", key))
        shuffled = members[:]
        rng.shuffle(shuffled)
        take = round(test_fraction * len(members))
        test_ids.update(shuffled[:take])
    train = [p for i, p in enumerate(corpus.pairs) if i not in test_ids]
    test = [p for i, p in enumerate(corpus.pairs) if i in test_ids]
    return build_corpus(train), build_corpus(test)


def generate_corpus(
    schema: SchemaBundle,
    templates: list[TemplatePair],
    lex: dict[str, list[str]],
    cfg: GeneratorConfig,
    plex: ParaphraseLexicon | None = None,
    clex: ComparativeLexicon | None = None,
) -> Corpus:
    """Full generation driver: drop templates the schema cannot fill (e.g.
    join templates on a one-table schema), instantiate the rest, augment,
    deduplicate."""
    usable: list[TemplatePair] = []
    skipped: list[str] = []
    for t in templates:
        if template_applicable(schema, t, lex, cfg):
            usable.append(t)
        else:
            skipped.append(t.id)
    if not usable:
        raise SlotUnfillable("no template is fillable on this schema")
    pairs = instantiate(schema, usable, lex, cfg)
    pairs = augment_corpus(pairs, plex, clex, schema, cfg)
    corpus = build_corpus(pairs)
    corpus.stats["skipped_templates"] = sorted(skipped)
    tag_counts: dict[str, int] = {}
    by_id = {t.id: t for t in templates}
    for p in corpus.pairs:
        t = by_id.get(p.template_id)
        if t is None:
            continue
        for tag in t.tags:
            tag_counts[tag] = tag_counts.get(tag, 0) + 1
    corpus.stats["per_tag"] = dict(sorted(tag_counts.items()))
    return corpus
