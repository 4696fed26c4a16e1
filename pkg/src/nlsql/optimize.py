"""Generator-parameter tuning by Bayesian optimization.

The objective Acc(cfg) is: synthesize a corpus under cfg, build the
retrieval baseline on it, run the full pipeline over a fixed workload of
(NL question, gold SQL) items, score relaxed correctness. A Gaussian
process surrogate with an RBF kernel drives Expected Improvement over
random candidate points, batched with the constant-liar trick.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

import numpy as np

from .corpus import Corpus, build_corpus, generate_corpus
from .errors import DegenerateSurrogate, NlsqlError, PipelineError
from .pipeline import Pipeline, expand_join
from .schema import SchemaBundle
from .sqlexec import execute, relaxed_correct
from .sqlparser import parse
from .templates import GeneratorConfig
from .textnorm import is_number, stable_hash, tokenize_nl
from .translate import RetrievalModel
from .valueindex import ValueIndex

JITTER = 1e-6
LENGTH_SCALE_GRID = (0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0)
CANDIDATES_PER_PICK = 1000
DEFAULT_PAIR_CAP = 20000

BOUND_KINDS = ("continuous", "integer", "probability")


@dataclass(frozen=True)
class TestWorkload:
    """Questions with constants filled in, paired with gold SQL."""

    items: tuple[tuple[str, str], ...]

    def validate(self, schema: SchemaBundle) -> None:
        for _nl, gold in self.items:
            execute(parse(gold), schema)

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class OptRecord:
    config: GeneratorConfig
    acc: float
    batch: int
    wall_time: float
    note: str = ""


# ------------------------------------------------------- workload building


def _dummy_value(schema: SchemaBundle, idx: ValueIndex, table: str, column: str, rng):
    """A value from the column's own data, preferring one whose exact index
    origin is unique so re-anonymization cannot land elsewhere."""
    values = [str(v) for v in schema.column_values(table, column)]
    if not values:
        raise NlsqlError(f"column {table}.{column} has no data to draw from")
    unique = [v for v in values if idx.exact_origins(v) == [(table, column)]]
    pool = unique or values
    return pool[rng.randrange(len(pool))]


def fill_constants(
    pair_nl: str,
    pair_sql: str,
    schema: SchemaBundle,
    idx: ValueIndex,
    rng: random.Random,
) -> tuple[str, str]:
    """Substitute type-conformant dummy constants for every placeholder,
    returning (nl with constants, gold sql with constants)."""
    chosen: dict[str, str] = {}

    def value_for(ph: str) -> tuple[str, str, str]:
        table, _dot, column = ph[1:].lower().partition(".")
        if ph not in chosen:
            chosen[ph] = _dummy_value(schema, idx, table, column, rng)
        return table, column, chosen[ph]

    nl_out = []
    for tok in pair_nl.split(" "):
        if tok.startswith("@") and tok != "@JOIN":
            _t, _c, value = value_for(tok)
            nl_out.extend(tokenize_nl(value) or [value])
        else:
            nl_out.append(tok)

    sql_out = []
    for tok in pair_sql.split(" "):
        if tok.startswith("@") and tok != "@JOIN":
            table, column, value = value_for(tok)
            col = schema.table(table).column(column)
            if col.is_numeric and is_number(value):
                sql_out.append(value)
            else:
                sql_out.append("'" + value.replace("'", "") + "'")
        else:
            sql_out.append(tok)
    gold = " ".join(sql_out)
    if "@JOIN" in sql_out:
        # gold must be executable, so the placeholder is resolved here with
        # the same minimal-path rule the pipeline applies
        gold = expand_join(gold, schema)
    return " ".join(nl_out), gold


def load_workload(path: str | Path) -> TestWorkload:
    """TSV of `nl question TAB gold sql`, one item per line."""
    from .errors import MalformedLine

    items = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), 1
    ):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            raise MalformedLine(f"{path}:{lineno}: expected `nl TAB sql`")
        items.append((fields[0].strip(), fields[1].strip()))
    return TestWorkload(items=tuple(items))


def make_workload(
    corpus: Corpus,
    schema: SchemaBundle,
    n: int,
    seed: int = 0,
    idx: ValueIndex | None = None,
) -> TestWorkload:
    """Draw n corpus pairs and fill their placeholders with dummy constants."""
    if idx is None:
        idx = ValueIndex(schema)
    rng = random.Random(stable_hash(seed, "workload"))
    pool = list(range(len(corpus.pairs)))
    picked = sorted(rng.sample(pool, min(n, len(pool))))
    items = []
    for i in picked:
        pair = corpus.pairs[i]
        pair_rng = random.Random(stable_hash(seed, "fill", pair.nl, pair.sql))
        items.append(fill_constants(pair.nl, pair.sql, schema, idx, pair_rng))
    return TestWorkload(items=tuple(items))


# --------------------------------------------------------------- objective


def evaluate_config(
    D: SchemaBundle,
    T: TestWorkload,
    cfg: GeneratorConfig,
    *,
    templates,
    lex,
    paraphrases=None,
    comparatives=None,
    pair_cap: int = DEFAULT_PAIR_CAP,
) -> float:
    """Acc of the full generate -> train (retrieval) -> translate chain."""
    if len(T) == 0:
        raise ValueError("empty workload: accuracy undefined")
    corpus = generate_corpus(D, templates, lex, cfg, paraphrases, comparatives)
    if len(corpus.pairs) > pair_cap:
        corpus = build_corpus(corpus.pairs[:pair_cap])
    model = RetrievalModel(corpus, D)
    pipe = Pipeline(D, model, run_queries=False)
    correct = 0
    for nl, gold in T.items:
        try:
            outcome = pipe.answer(nl)
            predicted = execute(parse(outcome.final_sql), D)
            expected = execute(parse(gold), D)
        except (PipelineError, NlsqlError):
            continue
        if relaxed_correct(predicted, expected):
            correct += 1
    return correct / len(T)


# -------------------------------------------------------------- GP + EI


def _rbf(a: np.ndarray, b: np.ndarray, ell: float) -> np.ndarray:
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-0.5 * d2 / (ell * ell))


class _Surrogate:
    """RBF-kernel GP with mean offset and ML length scale from a grid."""

    def __init__(self, Xn: np.ndarray, y: np.ndarray):
        self.Xn = Xn
        self.mean = float(y.mean())
        yc = y - self.mean
        self.sf2 = float(yc.var())
        if self.sf2 <= 0.0:
            raise DegenerateSurrogate("all observed values identical")
        n = len(y)
        best = None
        for ell in LENGTH_SCALE_GRID:
            K = self.sf2 * _rbf(Xn, Xn, ell) + JITTER * np.eye(n)
            sign, logdet = np.linalg.slogdet(K)
            if sign <= 0:
                continue
            alpha = np.linalg.solve(K, yc)
            ll = -0.5 * float(yc @ alpha) - 0.5 * logdet - 0.5 * n * math.log(2 * math.pi)
            if best is None or ll > best[0]:
                best = (ll, ell, K, alpha)
        if best is None:
            raise DegenerateSurrogate("no viable kernel length scale")
        _ll, self.ell, self.K, self.alpha = best

    def predict(self, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        Kq = self.sf2 * _rbf(Q, self.Xn, self.ell)
        mu = self.mean + Kq @ self.alpha
        v = np.linalg.solve(self.K, Kq.T)
        var = self.sf2 - (Kq * v.T).sum(axis=1)
        return mu, np.sqrt(np.clip(var, 0.0, None))


def expected_improvement(mu: float, sigma: float, best: float) -> float:
    """Closed-form EI for maximization; zero when sigma = 0 and mu <= best."""
    if sigma <= 0.0:
        return max(mu - best, 0.0)
    z = (mu - best) / sigma
    cdf = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
    pdf = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return (mu - best) * cdf + sigma * pdf


# ------------------------------------------------------------ bounds model


def load_bounds(path: str | Path) -> dict[str, tuple[float, float, str]]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return parse_bounds(raw)


def parse_bounds(raw: dict) -> dict[str, tuple[float, float, str]]:
    fields = set(GeneratorConfig().to_dict())
    bounds: dict[str, tuple[float, float, str]] = {}
    for name, spec in raw.items():
        if name not in fields:
            raise ValueError(f"bounds name {name!r} is not a generator parameter")
        lo, hi, kind = float(spec["lo"]), float(spec["hi"]), spec["kind"]
        if kind not in BOUND_KINDS:
            raise ValueError(f"bounds kind {kind!r} for {name!r}")
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"bounds for {name!r} must be finite with lo < hi")
        bounds[name] = (lo, hi, kind)
    return bounds


def _vector_to_config(names, vec, bounds) -> GeneratorConfig:
    values = {}
    for name, x in zip(names, vec):
        lo, hi, kind = bounds[name]
        x = min(max(float(x), lo), hi)
        if kind == "integer":
            values[name] = int(round(x))
        elif kind == "probability":
            values[name] = min(max(x, 0.0), 1.0)
        else:
            values[name] = x
    return dc_replace(GeneratorConfig(), **values)


def _config_to_vector(names, cfg) -> list[float]:
    d = cfg.to_dict()
    return [float(d[name]) for name in names]


def _normalize(names, vec, bounds) -> list[float]:
    out = []
    for name, x in zip(names, vec):
        lo, hi, _k = bounds[name]
        out.append((float(x) - lo) / (hi - lo))
    return out


def _sample_vector(names, bounds, rng) -> list[float]:
    vec = []
    for name in names:
        lo, hi, kind = bounds[name]
        if kind == "integer":
            vec.append(float(rng.randint(int(lo), int(hi))))
        else:
            vec.append(rng.uniform(lo, hi))
    return vec


# ---------------------------------------------------------------- BO loop


def optimize_fn(
    objective,
    bounds: dict[str, tuple[float, float, str]],
    batches: int,
    per_batch: int,
    warmup: int,
    seed: int = 0,
) -> tuple[OptRecord, list[OptRecord]]:
    """Core loop over an arbitrary objective(GeneratorConfig) -> float."""
    if warmup < 1 or batches < 0 or per_batch < 1:
        raise ValueError("warmup and per_batch must be >= 1, batches >= 0")
    names = sorted(bounds)
    rng = random.Random(stable_hash(seed, "bo"))
    trace: list[OptRecord] = []
    X: list[list[float]] = []
    y: list[float] = []

    def run(cfg: GeneratorConfig, batch: int, note: str = "") -> None:
        t0 = time.perf_counter()
        acc = objective(cfg)
        rec = OptRecord(cfg, acc, batch, time.perf_counter() - t0, note)
        trace.append(rec)
        X.append(_normalize(names, _config_to_vector(names, cfg), bounds))
        y.append(acc)

    for _ in range(warmup):
        run(_vector_to_config(names, _sample_vector(names, bounds, rng), bounds), 0)

    for batch in range(1, batches + 1):
        picks: list[GeneratorConfig] = []
        try:
            liars_X: list[list[float]] = []
            liars_y: list[float] = []
            for j in range(per_batch):
                surrogate = _Surrogate(
                    np.array(X + liars_X), np.array(y + liars_y)
                )
                crng = random.Random(stable_hash(seed, "cand", batch, j))
                cand_vecs = [
                    _sample_vector(names, bounds, crng)
                    for _ in range(CANDIDATES_PER_PICK)
                ]
                cand_cfgs = [
                    _vector_to_config(names, v, bounds) for v in cand_vecs
                ]
                Q = np.array(
                    [
                        _normalize(names, _config_to_vector(names, c), bounds)
                        for c in cand_cfgs
                    ]
                )
                mu, sigma = surrogate.predict(Q)
                incumbent = max(y + liars_y)
                ei = [
                    expected_improvement(float(m), float(s), incumbent)
                    for m, s in zip(mu, sigma)
                ]
                pick = int(np.argmax(ei))
                picks.append(cand_cfgs[pick])
                liars_X.append(list(Q[pick]))
                liars_y.append(float(mu[pick]))
            note = ""
        except DegenerateSurrogate as exc:
            picks = [
                _vector_to_config(names, _sample_vector(names, bounds, rng), bounds)
                for _ in range(per_batch)
            ]
            note = f"random fallback: {exc}"
        for cfg in picks:
            run(cfg, batch, note)

    best = max(trace, key=lambda r: r.acc)
    return best, trace


def bayes_optimize(
    D: SchemaBundle,
    T: TestWorkload,
    bounds: dict[str, tuple[float, float, str]],
    batches: int,
    per_batch: int,
    warmup: int,
    seed: int = 0,
    *,
    templates,
    lex,
    paraphrases=None,
    comparatives=None,
    pair_cap: int = DEFAULT_PAIR_CAP,
) -> tuple[OptRecord, list[OptRecord]]:
    def objective(cfg: GeneratorConfig) -> float:
        return evaluate_config(
            D,
            T,
            cfg,
            templates=templates,
            lex=lex,
            paraphrases=paraphrases,
            comparatives=comparatives,
            pair_cap=pair_cap,
        )

    return optimize_fn(objective, bounds, batches, per_batch, warmup, seed)


def random_search(
    objective,
    bounds: dict[str, tuple[float, float, str]],
    budget: int,
    seed: int = 0,
) -> tuple[OptRecord, list[OptRecord]]:
    """Pure random sampling at the same budget; the BO comparison baseline."""
    names = sorted(bounds)
    rng = random.Random(stable_hash(seed, "random-search"))
    trace = []
    for _ in range(budget):
        cfg = _vector_to_config(names, _sample_vector(names, bounds, rng), bounds)
        t0 = time.perf_counter()
        acc = objective(cfg)
        trace.append(OptRecord(cfg, acc, 0, time.perf_counter() - t0))
    best = max(trace, key=lambda r: r.acc)
    return best, trace


def write_trace(trace: list[OptRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in trace:
            fh.write(
                json.dumps(
                    {
                        "config": rec.config.to_dict(),
                        "acc": rec.acc,
                        "batch": rec.batch,
                        "wall_time": rec.wall_time,
                        "note": rec.note,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
