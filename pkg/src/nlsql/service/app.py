"""HTTP service wrapping the translation pipeline over immutable artifacts.

All state is loaded once at startup; every request handler only reads it,
so identical requests produce identical responses and concurrent handling
is safe. Domain failures map to 422 with a stage label; malformed bodies
map to 400.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..complete import NgramModel, build_model, build_or_load, suggest
from ..config import AppConfig
from ..corpus import Corpus, read_corpus
from ..errors import NlsqlError, PipelineError
from ..pipeline import Pipeline
from ..schema import SchemaBundle, load_schema
from ..sqlexec import ResultTable, execute, plain_value
from ..sqlparser import parse
from ..translate import RetrievalModel
from ..valueindex import ValueIndex, load_embeddings
from .models import (
    BindingOut,
    ColumnOut,
    CompleteOut,
    ExecuteIn,
    FkOut,
    HealthOut,
    ResultOut,
    SchemaOut,
    SuggestionOut,
    TableOut,
    TranslateIn,
    TranslateOut,
)


def _result_out(result: ResultTable) -> ResultOut:
    return ResultOut(
        columns=list(result.columns),
        rows=[[plain_value(v) for v in row] for row in result.rows],
    )


def create_app(
    cfg: AppConfig,
    *,
    schema: SchemaBundle | None = None,
    corpus: Corpus | None = None,
    completion: NgramModel | None = None,
) -> FastAPI:
    if schema is None:
        schema = load_schema(cfg.schema)
    if corpus is None:
        corpus = read_corpus(cfg.corpus)
    embeddings = load_embeddings(cfg.embeddings) if cfg.embeddings else None
    idx = ValueIndex(schema, embeddings, tau_embed=cfg.tau_embed)
    model = RetrievalModel(corpus, schema)
    pipe = Pipeline(
        schema, model, index=idx, delta_jac=cfg.delta_jac, run_queries=False
    )
    if completion is None:
        if cfg.corpus:
            cache = Path(cfg.corpus).with_suffix(".complete.bin")
            completion = build_or_load(corpus, cache, schema)
        else:
            completion = build_model(corpus, schema)

    app = FastAPI(title="nlsql service")

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_req, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(NlsqlError)
    async def domain_error(_req, exc: NlsqlError):
        stage = exc.stage if isinstance(exc, PipelineError) else None
        return JSONResponse(
            status_code=422,
            content={
                "detail": {
                    "error": type(exc).__name__,
                    "message": str(exc),
                    "stage": stage,
                }
            },
        )

    @app.get("/api/schema", response_model=SchemaOut)
    def get_schema() -> SchemaOut:
        return SchemaOut(
            tables=[
                TableOut(
                    name=t.name,
                    columns=[
                        ColumnOut(
                            name=c.name,
                            type=c.type,
                            synonyms=list(c.synonyms),
                            domain=c.domain,
                        )
                        for c in t.columns
                    ],
                )
                for t in schema.tables
            ],
            fk_edges=[
                FkOut(
                    from_table=e.from_table,
                    from_column=e.from_column,
                    to_table=e.to_table,
                    to_column=e.to_column,
                )
                for e in schema.fk_edges
            ],
        )

    @app.post("/api/translate", response_model=TranslateOut)
    def post_translate(body: TranslateIn) -> TranslateOut:
        outcome = pipe.answer(body.question, k=body.k)
        return TranslateOut(
            final_sql=outcome.final_sql,
            anonymized=outcome.anonymized_nl,
            bindings=[
                BindingOut(
                    placeholder=b.placeholder,
                    constant=b.constant,
                    warning=b.warning,
                )
                for b in outcome.bindings
            ],
            repairs=list(outcome.repairs),
            score=outcome.score,
            raw_sql=outcome.raw_sql,
            result=_result_out(outcome.result) if outcome.result else None,
            error=outcome.error,
        )

    @app.get("/api/complete", response_model=CompleteOut)
    def get_complete(
        prefix: str = Query(default=""),
        k: int = Query(default=5, ge=1, le=50),
        depth: int = Query(default=2, ge=1, le=6),
    ) -> CompleteOut:
        ranked = suggest(completion, prefix, k, depth)
        return CompleteOut(
            prefix=prefix,
            suggestions=[
                SuggestionOut(phrase=p, probability=prob) for p, prob in ranked
            ],
        )

    @app.post("/api/execute", response_model=ResultOut)
    def post_execute(body: ExecuteIn) -> ResultOut:
        result = execute(parse(body.sql), schema)
        return _result_out(result)

    @app.get("/api/health", response_model=HealthOut)
    def get_health() -> HealthOut:
        return HealthOut(
            status="ok",
            seed=cfg.seed,
            corpus_pairs=len(corpus.pairs),
            schema_tables=len(schema.tables),
        )

    if cfg.static_dir:
        app.mount(
            "/", StaticFiles(directory=cfg.static_dir, html=True), name="console"
        )
    return app
