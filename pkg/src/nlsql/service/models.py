"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ColumnOut(BaseModel):
    name: str
    type: str
    synonyms: list[str] = []
    domain: str | None = None


class TableOut(BaseModel):
    name: str
    columns: list[ColumnOut]


class FkOut(BaseModel):
    from_table: str
    from_column: str
    to_table: str
    to_column: str


class SchemaOut(BaseModel):
    tables: list[TableOut]
    fk_edges: list[FkOut]


class TranslateIn(BaseModel):
    question: str = Field(min_length=1)
    k: int = Field(default=1, ge=1, le=50)


class BindingOut(BaseModel):
    placeholder: str
    constant: str
    warning: str | None = None


class ResultOut(BaseModel):
    columns: list[str]
    rows: list[list[object]]


class TranslateOut(BaseModel):
    final_sql: str
    anonymized: str
    bindings: list[BindingOut]
    repairs: list[str]
    score: float
    raw_sql: str
    result: ResultOut | None = None
    error: str | None = None


class SuggestionOut(BaseModel):
    phrase: str
    probability: float


class CompleteOut(BaseModel):
    prefix: str
    suggestions: list[SuggestionOut]


class ExecuteIn(BaseModel):
    sql: str = Field(min_length=1)


class HealthOut(BaseModel):
    status: str
    seed: int
    corpus_pairs: int
    schema_tables: int
