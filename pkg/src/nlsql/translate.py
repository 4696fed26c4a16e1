"""Translation-model contract and the deterministic retrieval baseline.

A translation model maps anonymized, lemmatized NL tokens to a ranked list
of (SQL string, score). The baseline retrieves candidates from the corpus
token index and scores them with a mix of token-set Jaccard similarity and
word-level edit distance; a neural backend can replace it behind the same
contract, in-process or over the line protocol of SubprocessModel.
"""

from __future__ import annotations

import subprocess
from collections import Counter
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import AmbiguousPlaceholders, NoTranslation
from .schema import SchemaBundle

JACCARD_WEIGHT = 0.7
EDIT_WEIGHT = 0.3

_STOPWORDS_FILE = Path(__file__).parent / "assets" / "lexicons" / "stopwords.txt"


def load_stopwords(path: str | Path = _STOPWORDS_FILE) -> frozenset[str]:
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            words.append(word)
    return frozenset(words)


class TranslationModel:
    """Behavioral contract. Implementations must be deterministic given
    fixed state, emit only closed-vocabulary SQL tokens, and return top-k
    lists where top-k is a prefix of top-(k+1)."""

    def translate(self, nl_tokens: list[str], k: int) -> list[tuple[str, float]]:
        raise NotImplementedError


def word_edit_distance(a: list[str], b: list[str]) -> int:
    """Levenshtein distance over words."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, wa in enumerate(a, 1):
        cur = [i]
        for j, wb in enumerate(b, 1):
            cost = 0 if wa == wb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def realign_placeholders(
    sql: str,
    input_placeholders: list[str],
    column_type: dict[str, str] | None = None,
) -> str:
    """Rewrite the SQL's placeholders to the input's placeholder types.

    Placeholders present on both sides match themselves; the leftovers must
    admit exactly one type-respecting rewrite (types are column declared
    types when a schema mapping is given, otherwise a single class).
    Raises AmbiguousPlaceholders when none or several rewrites exist.
    """
    tokens = sql.split(" ")
    sql_phs = [t for t in tokens if t.startswith("@") and t != "@JOIN"]
    have = Counter(sql_phs)
    want = Counter(input_placeholders)
    if have == want:
        return sql

    matched = {ph: min(have[ph], want[ph]) for ph in set(have) | set(want)}
    left_sql = sorted((have - want).elements())
    left_want = sorted((want - have).elements())

    def type_of(ph: str) -> str:
        if column_type is None:
            return "any"
        return column_type.get(ph, "any")

    by_type_sql: dict[str, list[str]] = {}
    for ph in left_sql:
        by_type_sql.setdefault(type_of(ph), []).append(ph)
    by_type_want: dict[str, list[str]] = {}
    for ph in left_want:
        by_type_want.setdefault(type_of(ph), []).append(ph)

    if set(by_type_sql) != set(by_type_want):
        raise AmbiguousPlaceholders(
            f"no type-respecting rewrite of {left_sql} onto {left_want}"
        )
    mapping: dict[str, str] = {}
    for cls, sqls in by_type_sql.items():
        wants = by_type_want[cls]
        if len(sqls) != len(wants):
            raise AmbiguousPlaceholders(
                f"no type-respecting rewrite of {sqls} onto {wants}"
            )
        if len(sqls) > 1 and len(set(wants)) > 1:
            raise AmbiguousPlaceholders(
                f"several rewrites of {sqls} onto {wants} are possible"
            )
        for s in set(sqls):
            mapping[s] = wants[0]

    remaining = Counter(matched)
    out = []
    for t in tokens:
        if t.startswith("@") and t != "@JOIN":
            if remaining.get(t, 0) > 0:
                remaining[t] -= 1
                out.append(t)
            else:
                out.append(mapping[t])
        else:
            out.append(t)
    return " ".join(out)


class RetrievalModel(TranslationModel):
    """Nearest-utterance retrieval over the corpus.

    score = 0.7 x token-set Jaccard + 0.3 x (1 - normalized word edit
    distance); ties break to the shorter SQL, then lexicographic. Shared
    token counts come from one bincount over the query tokens' postings,
    and candidates are walked in order of the upper bound
    0.7 x jaccard + 0.3, so edit distance only runs until the running
    k-th best beats the next bound.
    """

    def __init__(
        self,
        corpus: Corpus,
        schema: SchemaBundle | None = None,
        stopwords: frozenset[str] | None = None,
    ):
        self.corpus = corpus
        self.stopwords = (
            stopwords if stopwords is not None else load_stopwords()
        )
        self._token_lists = [p.nl.split(" ") for p in corpus.pairs]
        self._token_sets = [frozenset(toks) for toks in self._token_lists]
        self._by_nl = {p.nl: i for i, p in enumerate(corpus.pairs)}
        self._sizes = np.array([len(s) for s in self._token_sets], dtype=np.int64)
        self._postings = {
            tok: np.array(ids, dtype=np.int64)
            for tok, ids in corpus.token_index.items()
        }
        self._column_type: dict[str, str] | None = None
        if schema is not None:
            self._column_type = {}
            for t in schema.tables:
                for c in t.columns:
                    ph = f"@{t.name.upper()}.{c.name.upper()}"
                    self._column_type[ph] = c.type

    def translate(self, nl_tokens: list[str], k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise ValueError("k must be positive")
        q_set = frozenset(nl_tokens)
        input_phs = [t for t in nl_tokens if t.startswith("@") and t != "@JOIN"]
        # Identity is the unique candidate that can score exactly 1.0, so a
        # top-1 exact hit needs no scan. All-stopword queries still take the
        # slow path so the shared-token rule decides them.
        if k == 1:
            hit = self._by_nl.get(" ".join(nl_tokens))
            if hit is not None and any(t not in self.stopwords for t in q_set):
                sql = self.corpus.pairs[hit].sql
                realigned = realign_placeholders(
                    sql, input_phs, self._column_type
                )
                return [(realigned, 1.0)]
        n = len(self.corpus.pairs)
        hit_lists = [
            self._postings[tok] for tok in q_set if tok in self._postings
        ]
        gate_lists = [
            self._postings[tok]
            for tok in q_set
            if tok not in self.stopwords and tok in self._postings
        ]
        if not gate_lists:
            raise NoTranslation(
                "no corpus pair shares a non-stopword token with the input"
            )
        inter = np.bincount(np.concatenate(hit_lists), minlength=n)
        gated = np.zeros(n, dtype=bool)
        gated[np.concatenate(gate_lists)] = True

        m = len(q_set)
        union = m + self._sizes - inter
        jac = np.where(union > 0, inter / np.maximum(union, 1), 1.0)
        candidates = np.flatnonzero(gated)
        candidates = candidates[np.argsort(-jac[candidates], kind="stable")]

        budget = max(4 * k, k + 8)
        scored: list[tuple[float, str, int]] = []

        def kth_score() -> float:
            if len(scored) < budget:
                return -1.0
            return scored[budget - 1][0]

        dirty = False
        for i in candidates:
            jac_i = float(jac[i])
            if JACCARD_WEIGHT * jac_i + EDIT_WEIGHT <= kth_score():
                # candidates are bound-ordered, so nothing later helps
                break
            p_tokens = self._token_lists[i]
            dist = word_edit_distance(list(nl_tokens), p_tokens)
            norm = max(len(nl_tokens), len(p_tokens)) or 1
            if jac_i == 1.0 and dist == 0:
                score = 1.0
            else:
                score = JACCARD_WEIGHT * jac_i + EDIT_WEIGHT * (
                    1.0 - dist / norm
                )
            sql = self.corpus.pairs[i].sql
            scored.append((score, sql, int(i)))
            dirty = True
            if len(scored) >= 2 * budget:
                scored.sort(key=lambda t: (-t[0], len(t[1]), t[1]))
                del scored[budget:]
                dirty = False
        if dirty:
            scored.sort(key=lambda t: (-t[0], len(t[1]), t[1]))
            del scored[budget:]

        results: list[tuple[str, float]] = []
        last_err: AmbiguousPlaceholders | None = None
        for score, sql, _i in scored:
            try:
                realigned = realign_placeholders(
                    sql, input_phs, self._column_type
                )
            except AmbiguousPlaceholders as err:
                # a near-miss can carry placeholders the input cannot supply
                # (wrong count or type); the next candidate may still fit
                last_err = err
                continue
            results.append((realigned, score))
            if len(results) == k:
                break
        if not results and last_err is not None:
            raise last_err
        return results


class SubprocessModel(TranslationModel):
    """Line-protocol adapter for an external model process.

    Request: one line, the anonymized NL tokens joined by spaces.
    Response: zero or more `score TAB sql` lines, then one empty line.
    The process is started once and reused across calls.
    """

    def __init__(self, cmd: list[str]):
        self.proc = subprocess.Popen(
            cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def translate(self, nl_tokens: list[str], k: int) -> list[tuple[str, float]]:
        assert self.proc.stdin is not None and self.proc.stdout is not None
        self.proc.stdin.write(" ".join(nl_tokens) + "\n")
        self.proc.stdin.flush()
        results: list[tuple[str, float]] = []
        while True:
            line = self.proc.stdout.readline()
            if line == "" or line == "\n":
                break
            score_text, _, sql = line.rstrip("\n").partition("\t")
            results.append((sql, float(score_text)))
        if not results:
            raise NoTranslation("backend returned no candidates")
        return results[:k]

    def close(self) -> None:
        if self.proc.stdin is not None:
            self.proc.stdin.close()
        self.proc.wait(timeout=5)
