"""Per-column value index used to map NL constants onto schema columns.

Exact lookup goes through an inverted index over the normalized column
values. When that misses, text constants fall back to cosine similarity
against per-column centroid vectors; vectors come from an optional
word-embedding file ("word v1 v2 ..." per line) or, by default, from
hashed character trigrams so the index works with zero external data.
"""

from __future__ import annotations

import math
from pathlib import Path

from .errors import MalformedSchema, NoCandidateColumn
from .schema import SchemaBundle
from .textnorm import is_number, normalize_constant, trigram_vector

DEFAULT_TAU_EMBED = 0.35
TRIGRAM_DIM = 64


def load_embeddings(path: str | Path) -> dict[str, list[float]]:
    """Parse a word-embedding text file: word then whitespace-separated floats."""
    table: dict[str, list[float]] = {}
    dim = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        try:
            vec = [float(x) for x in parts[1:]]
        except ValueError:
            raise MalformedSchema(f"embedding file line {lineno}: bad float") from None
        if not vec:
            raise MalformedSchema(f"embedding file line {lineno}: no vector components")
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise MalformedSchema(
                f"embedding file line {lineno}: dimension {len(vec)} != {dim}"
            )
        table[parts[0].lower()] = vec
    return table


def _cosine(a: list[float], b: list[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def _mean(vectors: list[list[float]]) -> list[float]:
    n = len(vectors)
    return [sum(col) / n for col in zip(*vectors)]


class ValueIndex:
    """Inverted value index plus text-column centroids.

    Immutable after construction; rebuild to pick up new rows.
    """

    def __init__(
        self,
        schema: SchemaBundle,
        embeddings: dict[str, list[float]] | None = None,
        tau_embed: float = DEFAULT_TAU_EMBED,
    ):
        self.tau_embed = tau_embed
        self._embeddings = embeddings
        self.postings: dict[str, set[tuple[str, str]]] = {}
        self.centroids: dict[tuple[str, str], list[float]] = {}
        self._numeric_ranges: dict[tuple[str, str], tuple[float, float]] = {}
        self._numeric_value_sets: dict[tuple[str, str], set[float]] = {}
        self._schema = schema

        for table in schema.tables:
            for col in table.columns:
                values = schema.column_values(table.name, col.name)
                key = (table.name, col.name)
                if col.is_numeric:
                    nums = [float(v) for v in values]
                    if nums:
                        self._numeric_ranges[key] = (min(nums), max(nums))
                        self._numeric_value_sets[key] = set(nums)
                    for v in values:
                        self._post(normalize_constant(str(v)), key)
                else:
                    vecs = []
                    for v in values:
                        norm = normalize_constant(str(v))
                        self._post(norm, key)
                        vecs.append(self.embed(norm))
                    if vecs:
                        self.centroids[key] = _mean(vecs)

    def _post(self, norm: str, origin: tuple[str, str]) -> None:
        self.postings.setdefault(norm, set()).add(origin)

    def __len__(self) -> int:
        return sum(len(origins) for origins in self.postings.values())

    def embed(self, text: str) -> list[float]:
        """Vector for a piece of text under the configured embedding source."""
        if self._embeddings is None:
            return trigram_vector(text, TRIGRAM_DIM)
        words = normalize_constant(text).split()
        hits = [self._embeddings[w] for w in words if w in self._embeddings]
        if not hits:
            dim = len(next(iter(self._embeddings.values())))
            return [0.0] * dim
        return _mean(hits)

    def exact_origins(self, constant: str) -> list[tuple[str, str]]:
        norm = normalize_constant(constant)
        return sorted(self.postings.get(norm, ()))

    def classify(self, constant: str, tau: float | None = None) -> list[tuple[str, str, float]]:
        """Rank (table, column, score) candidates for a constant.

        Exact matches come first with score 1.0. Text constants then fall
        back to centroid cosine similarity filtered by tau; numeric
        constants only ever match numeric columns, scored by whether they
        land inside the column's observed range.
        """
        tau = self.tau_embed if tau is None else tau
        results: list[tuple[str, str, float]] = []
        seen: set[tuple[str, str]] = set()
        for t, c in self.exact_origins(constant):
            results.append((t, c, 1.0))
            seen.add((t, c))

        if is_number(constant):
            value = float(constant)
            fallback = []
            for key, (lo, hi) in sorted(self._numeric_ranges.items()):
                if key in seen:
                    continue
                score = 0.6 if lo <= value <= hi else 0.4
                fallback.append((key[0], key[1], score))
            fallback.sort(key=lambda r: (-r[2], r[0], r[1]))
            results.extend(fallback)
            if not results:
                raise NoCandidateColumn(
                    f"numeric constant {constant!r} but schema has no numeric columns"
                )
            return results

        query_vec = self.embed(constant)
        fallback = []
        for key in sorted(self.centroids):
            if key in seen:
                continue
            score = _cosine(query_vec, self.centroids[key])
            if score >= tau:
                fallback.append((key[0], key[1], score))
        fallback.sort(key=lambda r: (-r[2], r[0], r[1]))
        results.extend(fallback)
        if not results:
            raise NoCandidateColumn(
                f"constant {constant!r}: no exact match and all centroid "
                f"similarities below {tau}"
            )
        return results


def classify_constant(
    idx: ValueIndex, constant: str, tau: float | None = None
) -> list[tuple[str, str, float]]:
    """Module-level alias for ValueIndex.classify."""
    return idx.classify(constant, tau)
