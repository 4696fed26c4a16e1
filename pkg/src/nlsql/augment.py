"""Corpus expansion: paraphrase substitution, word dropping, and domain
phrase substitution. Every augmentation changes only the NL side; the SQL
side and its placeholder multiset are untouched by construction.

Per-pair randomness is seeded from the pair's own content plus cfg.seed, so
runs are reproducible and order-independent, and identical pairs expand
identically wherever they sit in the corpus.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import MalformedLine
from .schema import SchemaBundle
from .templates import GeneratorConfig, NlSqlPair
from .textnorm import lemmatize, lemmatize_token, stable_hash, tokenize_nl

__all__ = [
    "ParaphraseLexicon",
    "ComparativeLexicon",
    "load_paraphrases",
    "load_comparatives",
    "paraphrase",
    "drop_words",
    "domain_substitute",
    "augment_pair",
    "augment_corpus",
    "lemmatize",
]

# Tokens that carry the SQL operator or aggregate choice; dropping them
# makes the NL side unrecoverable noise, so they are never deleted.
PROTECTED_WORDS = frozenset(
    {
        "greater", "less", "than", "least", "most", "not", "and", "or",
        "maximum", "minimum", "average", "total", "sum", "count", "number",
        "many", "each", "per", "distinct", "different",
    }
)


class ParaphraseLexicon:
    """n-gram → ranked (paraphrase, score) list; keys stored lemmatized."""

    def __init__(self, entries: dict[str, list[tuple[str, float]]]):
        self.entries = {
            key: sorted(vals, key=lambda v: (-v[1], v[0]))
            for key, vals in entries.items()
        }

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def lookup(self, ngram: str) -> list[tuple[str, float]]:
        return self.entries.get(ngram, [])

    def max_key_len(self) -> int:
        if not self.entries:
            return 0
        return max(len(k.split(" ")) for k in self.entries)


def load_paraphrases(path: str | Path) -> ParaphraseLexicon:
    """Read a 3-column TSV: lhs TAB rhs TAB score."""
    entries: dict[str, list[tuple[str, float]]] = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), 1
    ):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise MalformedLine(
                f"{path}:{lineno}: expected 3 tab-separated fields, "
                f"got {len(parts)}"
            )
        lhs, rhs, score_text = parts
        try:
            score = float(score_text)
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: bad score {score_text!r}") from None
        key = " ".join(lemmatize(tokenize_nl(lhs)))
        if not key or key.startswith("@"):
            raise MalformedLine(f"{path}:{lineno}: unusable left-hand side")
        entries.setdefault(key, []).append((rhs, score))
    return ParaphraseLexicon(entries)


@dataclass(frozen=True)
class ComparativeEntry:
    generic: str
    domain: str
    phrase: str


class ComparativeLexicon:
    def __init__(self, entries: list[ComparativeEntry]):
        self.entries = list(entries)

    def __len__(self) -> int:
        return len(self.entries)


def load_comparatives(path: str | Path) -> ComparativeLexicon:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = [
        ComparativeEntry(e["generic"], e["domain"], e["phrase"]) for e in raw
    ]
    return ComparativeLexicon(entries)


def _nl_tokens(pair: NlSqlPair) -> list[str]:
    return pair.nl.split(" ")


def _rebuild(pair: NlSqlPair, tokens: list[str], trail: str) -> NlSqlPair:
    nl = " ".join(lemmatize(tokens))
    return NlSqlPair(
        nl=nl,
        sql=pair.sql,
        placeholders=pair.placeholders,
        provenance=f"{pair.provenance}+{trail}",
    )


def paraphrase(
    pair: NlSqlPair, lex: ParaphraseLexicon, cfg: GeneratorConfig
) -> list[NlSqlPair]:
    """One duplicate per (matched n-gram site, paraphrase), scanning sites
    left to right and taking at most num_para top-scored paraphrases per
    site. n-grams longer than size_para never match; sites containing a
    placeholder never match."""
    if cfg.num_para == 0:
        return []
    tokens = _nl_tokens(pair)
    out = []
    max_n = min(cfg.size_para, lex.max_key_len())
    for start in range(len(tokens)):
        for n in range(1, max_n + 1):
            end = start + n
            if end > len(tokens):
                break
            window = tokens[start:end]
            if any(t.startswith("@") for t in window):
                continue
            hits = lex.lookup(" ".join(window))
            taken = 0
            for replacement, score in hits:
                if taken >= cfg.num_para:
                    break
                if score < cfg.min_para_score:
                    continue
                replaced = (
                    tokens[:start]
                    + tokenize_nl(replacement)
                    + tokens[end:]
                )
                out.append(
                    _rebuild(
                        pair, replaced, f"para({' '.join(window)}:{taken})"
                    )
                )
                taken += 1
    return out


def _protected(pair: NlSqlPair) -> set[str]:
    """Tokens never dropped: placeholders, words from the SQL side's
    identifiers, and operator-bearing words."""
    protected = set(PROTECTED_WORDS)
    for tok in pair.sql.split(" "):
        if tok.startswith("@"):
            protected.add(tok)
        elif tok.isidentifier():
            for word in tok.lower().split("_"):
                protected.add(lemmatize_token(word))
    return protected


def drop_words(pair: NlSqlPair, cfg: GeneratorConfig) -> list[NlSqlPair]:
    """Up to num_missing duplicates, each deleting one eligible token; runs
    at all with probability randDrop_p."""
    if cfg.num_missing == 0 or cfg.randDrop_p == 0.0:
        return []
    rng = random.Random(stable_hash(cfg.seed, "drop", pair.nl, pair.sql))
    if rng.random() >= cfg.randDrop_p:
        return []
    tokens = _nl_tokens(pair)
    protected = _protected(pair)
    eligible = [
        i
        for i, tok in enumerate(tokens)
        if not tok.startswith("@") and tok not in protected and tok != ","
    ]
    if not eligible:
        return []
    picks = sorted(rng.sample(eligible, min(cfg.num_missing, len(eligible))))
    out = []
    for i in picks:
        dropped = tokens[:i] + tokens[i + 1 :]
        out.append(_rebuild(pair, dropped, f"drop({tokens[i]})"))
    return out


def domain_substitute(
    pair: NlSqlPair, lex: ComparativeLexicon, schema: SchemaBundle
) -> list[NlSqlPair]:
    """One duplicate per site where a generic phrase sits next to a
    placeholder or column mention whose column carries the entry's domain
    tag."""
    tokens = _nl_tokens(pair)
    out = []
    for entry in lex.entries:
        phrase_tokens = lemmatize(tokenize_nl(entry.generic))
        n = len(phrase_tokens)
        for start in range(len(tokens) - n + 1):
            if tokens[start : start + n] != phrase_tokens:
                continue
            if not _site_has_domain(tokens, start, n, entry.domain, schema):
                continue
            replaced = (
                tokens[:start] + tokenize_nl(entry.phrase) + tokens[start + n :]
            )
            out.append(
                _rebuild(pair, replaced, f"domain({entry.generic}@{start})")
            )
    return out


def _site_has_domain(
    tokens: list[str], start: int, n: int, domain: str, schema: SchemaBundle
) -> bool:
    after = tokens[start + n] if start + n < len(tokens) else None
    if after is not None and after.startswith("@") and "." in after:
        table, _, column = after[1:].partition(".")
        table, column = table.lower(), column.lower()
        if schema.has_table(table):
            tdef = schema.table(table)
            if tdef.has_column(column) and tdef.column(column).domain == domain:
                return True
    # a column mention directly before the phrase also anchors it
    for t in schema.tables:
        for c in t.columns:
            if c.domain != domain:
                continue
            surface = lemmatize(tokenize_nl(c.surface_form()))
            k = len(surface)
            if k == 0 or start - k < 0:
                continue
            if tokens[start - k : start] == surface:
                return True
    return False


def augment_pair(
    pair: NlSqlPair,
    plex: ParaphraseLexicon | None,
    clex: ComparativeLexicon | None,
    schema: SchemaBundle,
    cfg: GeneratorConfig,
) -> list[NlSqlPair]:
    """The pair itself plus all single-step augmentations of it."""
    out = [pair]
    if plex is not None:
        out.extend(paraphrase(pair, plex, cfg))
    out.extend(drop_words(pair, cfg))
    if clex is not None:
        out.extend(domain_substitute(pair, clex, schema))
    return out


def augment_corpus(
    pairs: list[NlSqlPair],
    plex: ParaphraseLexicon | None,
    clex: ComparativeLexicon | None,
    schema: SchemaBundle,
    cfg: GeneratorConfig,
) -> list[NlSqlPair]:
    out: list[NlSqlPair] = []
    for pair in pairs:
        out.extend(augment_pair(pair, plex, clex, schema, cfg))
    return out
