"""Command-line front door.

Exit codes: 0 success, 1 domain error, 2 usage error (argparse's own).
Subcommands mirror the module layout: generate, index, translate,
complete, bench, optimize, serve, exec.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace as dc_replace
from pathlib import Path

from .bench import load_benchmark, render_table, run_benchmark, write_report_json
from .complete import build_model, build_or_load, save_model, suggest
from .config import load_config
from .corpus import generate_corpus, read_corpus, write_corpus
from .errors import NlsqlError
from .optimize import bayes_optimize, load_bounds, load_workload, write_trace
from .pipeline import DEFAULT_DELTA_JAC, Pipeline
from .schema import load_schema
from .sqlexec import execute, plain_value
from .sqlparser import parse
from .templates import GeneratorConfig, load_lexicon, load_templates
from .translate import RetrievalModel
from .valueindex import DEFAULT_TAU_EMBED, ValueIndex, load_embeddings


def _templates_from(path: str):
    p = Path(path)
    if p.is_dir():
        templates = []
        for f in sorted(p.glob("*.json")):
            templates.extend(load_templates(f))
        return templates
    return load_templates(p)


def _lexicons_from(path: str):
    """phrases.json (required), paraphrases.tsv and comparatives.json
    (optional) from a lexicon directory."""
    from .augment import load_comparatives, load_paraphrases

    d = Path(path)
    lex = load_lexicon(d / "phrases.json")
    plex = None
    clex = None
    if (d / "paraphrases.tsv").exists():
        plex = load_paraphrases(d / "paraphrases.tsv")
    if (d / "comparatives.json").exists():
        clex = load_comparatives(d / "comparatives.json")
    return lex, plex, clex


def _print_rows(result) -> None:
    print("\t".join(result.columns))
    for row in result.rows:
        print("\t".join(str(plain_value(v)) for v in row))


def _build_pipeline(args, run_queries: bool) -> Pipeline:
    schema = load_schema(args.schema)
    corpus = read_corpus(args.corpus)
    embeddings = None
    if getattr(args, "embeddings", None):
        embeddings = load_embeddings(args.embeddings)
    idx = ValueIndex(schema, embeddings, tau_embed=args.tau_embed)
    model = RetrievalModel(corpus, schema)
    return Pipeline(
        schema, model, index=idx, delta_jac=args.delta_jac, run_queries=run_queries
    )


# ------------------------------------------------------------- subcommands


def cmd_generate(args) -> int:
    schema = load_schema(args.schema)
    templates = _templates_from(args.templates)
    lex, plex, clex = _lexicons_from(args.lexicons)
    cfg = GeneratorConfig()
    if args.config:
        cfg = GeneratorConfig.from_dict(
            json.loads(Path(args.config).read_text(encoding="utf-8"))
        )
    if args.seed is not None:
        cfg = dc_replace(cfg, seed=args.seed)
    corpus = generate_corpus(schema, templates, lex, cfg, plex, clex)
    write_corpus(corpus, args.out)
    stats_path = Path(args.out).with_suffix(".stats.json")
    stats_path.write_text(
        json.dumps(corpus.stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"{len(corpus.pairs)} pairs -> {args.out} (stats: {stats_path})")
    return 0


def cmd_index(args) -> int:
    schema = load_schema(args.schema)
    corpus = read_corpus(args.corpus)
    model = build_model(corpus, schema)
    save_model(model, args.out)
    print(f"completion model: {len(model.vocab)} tokens -> {args.out}")
    return 0


def cmd_translate(args) -> int:
    pipe = _build_pipeline(args, run_queries=True)
    outcome = pipe.answer(args.question, k=args.k)
    print(outcome.final_sql)
    for note in outcome.repairs:
        print(f"-- repair: {note}", file=sys.stderr)
    if outcome.error:
        print(f"-- {outcome.error}", file=sys.stderr)
    elif outcome.result is not None:
        _print_rows(outcome.result)
    return 0


def cmd_complete(args) -> int:
    schema = load_schema(args.schema)
    corpus = read_corpus(args.corpus)
    if args.cache:
        model = build_or_load(corpus, args.cache, schema)
    else:
        model = build_model(corpus, schema)
    for phrase, prob in suggest(model, args.prefix, args.k, args.depth):
        print(f"{phrase}\t{prob:.6g}")
    return 0


def cmd_bench(args) -> int:
    pipe = _build_pipeline(args, run_queries=False)
    benchmark = load_benchmark(args.benchmark)
    report = run_benchmark(benchmark, pipe)
    print(render_table([(args.label, report)]), end="")
    if args.json_out:
        write_report_json(report, args.json_out)
    return 0


def cmd_optimize(args) -> int:
    schema = load_schema(args.schema)
    templates = _templates_from(args.templates)
    lex, plex, clex = _lexicons_from(args.lexicons)
    bounds = load_bounds(args.bounds)
    workload = load_workload(args.workload)
    workload.validate(schema)
    best, trace = bayes_optimize(
        schema,
        workload,
        bounds,
        batches=args.batches,
        per_batch=args.per_batch,
        warmup=args.warmup,
        seed=args.seed,
        templates=templates,
        lex=lex,
        paraphrases=plex,
        comparatives=clex,
        pair_cap=args.pair_cap,
    )
    if args.trace:
        write_trace(trace, args.trace)
    print(json.dumps({"acc": best.acc, "config": best.config.to_dict()}, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = load_config(args.config)
    if args.port is not None:
        cfg.port = args.port
    app = create_app(cfg)
    uvicorn.run(app, host=args.host, port=cfg.port, log_level="warning")
    return 0


def cmd_exec(args) -> int:
    schema = load_schema(args.schema)
    result = execute(parse(args.sql), schema)
    _print_rows(result)
    return 0


# ------------------------------------------------------------------ parser


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schema", required=True, help="schema JSON path")
    p.add_argument("--corpus", required=True, help="corpus TSV path")
    p.add_argument("--embeddings", default=None, help="word-vector text file")
    p.add_argument("--tau-embed", dest="tau_embed", type=float, default=DEFAULT_TAU_EMBED)
    p.add_argument("--delta-jac", dest="delta_jac", type=float, default=DEFAULT_DELTA_JAC)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlsql")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize an NL-SQL training corpus")
    p.add_argument("--schema", required=True)
    p.add_argument("--templates", required=True, help="template JSON file or directory")
    p.add_argument("--lexicons", required=True, help="lexicon directory")
    p.add_argument("--config", default=None, help="generator config JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("index", help="build the completion model cache")
    p.add_argument("--schema", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("translate", help="translate one NL question")
    _add_pipeline_flags(p)
    p.add_argument("-q", "--question", required=True)
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("complete", help="suggest continuations for a prefix")
    p.add_argument("--schema", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--prefix", default="")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--cache", default=None)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("bench", help="run a category-labeled benchmark")
    _add_pipeline_flags(p)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--label", default="retrieval")
    p.add_argument("--json-out", dest="json_out", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("optimize", help="tune generator parameters")
    p.add_argument("--schema", required=True)
    p.add_argument("--templates", required=True)
    p.add_argument("--lexicons", required=True)
    p.add_argument("--bounds", required=True)
    p.add_argument("--workload", required=True)
    p.add_argument("--batches", type=int, default=4)
    p.add_argument("--per-batch", dest="per_batch", type=int, default=4)
    p.add_argument("--warmup", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pair-cap", dest="pair_cap", type=int, default=20000)
    p.add_argument("--trace", default=None, help="JSONL trace output path")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("exec", help="execute a SQL query on the schema data")
    p.add_argument("--schema", required=True)
    p.add_argument("--sql", required=True)
    p.set_defaults(func=cmd_exec)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NlsqlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
