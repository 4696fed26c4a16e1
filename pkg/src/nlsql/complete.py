"""Typeahead suggestions from a smoothed trigram model over the corpus NL.

The model is built once from a corpus and is immutable afterwards; a
prefix trie over the same utterances restricts the breadth-first search
to real corpus continuations whenever the typed prefix is itself a
corpus prefix, which keeps suggestions grounded.
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass, field

from .corpus import Corpus
from .schema import SchemaBundle
from .textnorm import lemmatize, tokenize_nl

ADD_K = 0.01
BOS = "<s>"
END_TOKEN = "</s>"
CACHE_MAGIC = b"NLQC"
CACHE_VERSION = 1


def _trie_insert(root: dict, tokens: list[str]) -> None:
    node = root
    for tok in tokens:
        node = node.setdefault(tok, {})
    node[END_TOKEN] = {}


def _trie_find(root: dict, tokens: list[str]) -> dict | None:
    node = root
    for tok in tokens:
        if tok not in node:
            return None
        node = node[tok]
    return node


@dataclass
class NgramModel:
    """Add-k trigram counts plus the utterance trie.

    vocab includes END_TOKEN; contexts are padded with BOS. Probability
    lookups back off trigram -> bigram -> unigram when a context was
    never observed, and each family sums to 1 over the vocabulary.
    """

    vocab: list[str]
    tri: dict[tuple[str, str], dict[str, int]]
    bi: dict[str, dict[str, int]]
    uni: dict[str, int]
    total: int
    trie: dict
    surface: dict[str, str] = field(default_factory=dict)
    corpus_hash: str = ""

    def _family(self, c1: str, c2: str) -> tuple[dict[str, int], int]:
        counts = self.tri.get((c1, c2))
        if counts is not None:
            return counts, sum(counts.values())
        counts = self.bi.get(c2)
        if counts is not None:
            return counts, sum(counts.values())
        return self.uni, self.total

    def prob(self, c1: str, c2: str, w: str) -> float:
        counts, denom = self._family(c1, c2)
        return (counts.get(w, 0) + ADD_K) / (denom + ADD_K * len(self.vocab))

    def distribution(self, c1: str, c2: str) -> dict[str, float]:
        return {w: self.prob(c1, c2, w) for w in self.vocab}

    def render(self, tokens: list[str]) -> str:
        return " ".join(self.surface.get(t, t) for t in tokens)


def build_model(corpus: Corpus, schema: SchemaBundle | None = None) -> NgramModel:
    tri: dict[tuple[str, str], dict[str, int]] = {}
    bi: dict[str, dict[str, int]] = {}
    uni: dict[str, int] = {}
    trie: dict = {}
    vocab: set[str] = {END_TOKEN}

    for pair in corpus.pairs:
        tokens = lemmatize(pair.nl.split(" "))
        vocab.update(tokens)
        _trie_insert(trie, tokens)
        padded = [BOS, BOS] + tokens + [END_TOKEN]
        for i in range(2, len(padded)):
            c1, c2, w = padded[i - 2], padded[i - 1], padded[i]
            tri.setdefault((c1, c2), {})
            tri[(c1, c2)][w] = tri[(c1, c2)].get(w, 0) + 1
            bi.setdefault(c2, {})
            bi[c2][w] = bi[c2].get(w, 0) + 1
            uni[w] = uni.get(w, 0) + 1

    surface = {}
    if schema is not None:
        for t in schema.tables:
            for c in t.columns:
                ph = f"@{t.name.upper()}.{c.name.upper()}"
                surface[ph] = c.surface_form()

    return NgramModel(
        vocab=sorted(vocab),
        tri=tri,
        bi=bi,
        uni=uni,
        total=sum(uni.values()),
        trie=trie,
        surface=surface,
        corpus_hash=corpus.content_hash(),
    )


def suggest(
    m: NgramModel, prefix: str, k: int, depth: int = 2
) -> list[tuple[str, float]]:
    """Breadth-first continuation search.

    States carry (tokens, probability product); each level keeps the
    max(k, 16) most probable. A state finishing on END_TOKEN stops
    expanding; finished states and depth-d states compete for the final
    top k. When the prefix is a corpus prefix, expansion is restricted
    to trie children so every suggestion extends a real utterance.
    """
    if k < 1 or depth < 1:
        raise ValueError("k and depth must be positive")
    prefix_tokens = lemmatize(tokenize_nl(prefix)) if prefix.strip() else []
    beam_width = max(k, 16)

    node = _trie_find(m.trie, prefix_tokens)
    # (tokens, probability, trie node or None)
    beam: list[tuple[list[str], float, dict | None]] = [([], 1.0, node)]
    finished: list[tuple[list[str], float]] = []

    for _level in range(depth):
        candidates: list[tuple[list[str], float, dict | None]] = []
        for tokens, p, nd in beam:
            context = (prefix_tokens + tokens)[-2:]
            while len(context) < 2:
                context = [BOS] + context
            c1, c2 = context
            if nd is not None:
                options = sorted(nd)
            else:
                options = m.vocab
            for w in options:
                if w == BOS:
                    continue
                np = p * m.prob(c1, c2, w)
                if w == END_TOKEN:
                    finished.append((tokens + [w], np))
                else:
                    child = nd[w] if nd is not None else None
                    candidates.append((tokens + [w], np, child))
        candidates.sort(key=lambda s: (-s[1], s[0]))
        beam = candidates[:beam_width]
        if not beam:
            break

    pool = finished + [(tokens, p) for tokens, p, _nd in beam]
    pool.sort(key=lambda s: (-s[1], s[0]))
    results = []
    for tokens, p in pool[:k]:
        shown = [t for t in tokens if t != END_TOKEN]
        phrase = m.render(shown) if shown else END_TOKEN
        results.append((phrase, p))
    return results


# ----------------------------------------------------------------- caching
#
# Layout: magic, version byte, hash length byte, corpus hash, pickle of the
# model fields. A stale or foreign file loads as None, never as garbage.


def save_model(m: NgramModel, path) -> None:
    payload = pickle.dumps(
        (m.vocab, m.tri, m.bi, m.uni, m.total, m.trie, m.surface)
    )
    blob = bytearray()
    blob += CACHE_MAGIC
    blob.append(CACHE_VERSION)
    digest = m.corpus_hash.encode("ascii")
    blob.append(len(digest))
    blob += digest
    blob += payload
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def load_model(path, corpus_hash: str) -> NgramModel | None:
    try:
        raw = open(path, "rb").read()
    except OSError:
        return None
    if len(raw) < 6 or raw[:4] != CACHE_MAGIC or raw[4] != CACHE_VERSION:
        return None
    hlen = raw[5]
    digest = raw[6 : 6 + hlen].decode("ascii", errors="replace")
    if digest != corpus_hash:
        return None
    try:
        vocab, tri, bi, uni, total, trie, surface = pickle.loads(raw[6 + hlen :])
    except Exception:
        return None
    return NgramModel(
        vocab=vocab,
        tri=tri,
        bi=bi,
        uni=uni,
        total=total,
        trie=trie,
        surface=surface,
        corpus_hash=digest,
    )


def build_or_load(
    corpus: Corpus, cache_path, schema: SchemaBundle | None = None
) -> NgramModel:
    cached = load_model(cache_path, corpus.content_hash())
    if cached is not None:
        return cached
    model = build_model(corpus, schema)
    save_model(model, cache_path)
    return model
