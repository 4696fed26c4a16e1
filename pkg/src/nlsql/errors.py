"""Exception hierarchy shared by all nlsql modules.

Every domain failure derives from NlsqlError so the CLI and the HTTP
service can map them to exit code 1 / status 422 uniformly.
"""


class NlsqlError(Exception):
    """Base class for all domain errors."""


# schema loading / validation

class MalformedSchema(NlsqlError):
    pass


class DuplicateName(NlsqlError):
    pass


class DanglingForeignKey(NlsqlError):
    pass


class RowArityMismatch(NlsqlError):
    pass


# join graph

class NoJoinPath(NlsqlError):
    pass


# value index

class NoCandidateColumn(NlsqlError):
    pass


# template instantiation

class SlotUnfillable(NlsqlError):
    pass


class EmptyLexicon(NlsqlError):
    pass


# corpus persistence

class MalformedLine(NlsqlError):
    pass


# translation

class NoTranslation(NlsqlError):
    pass


class AmbiguousPlaceholders(NlsqlError):
    pass


# runtime pipeline

class UnmappableConstant(NlsqlError):
    """Constant could not be mapped to any column.

    Carried as a warning binding by the preprocessor; only raised when a
    caller asks for strict classification directly.
    """


class UnboundPlaceholder(NlsqlError):
    pass


class UnrepairableSql(NlsqlError):
    pass


class PipelineError(NlsqlError):
    """Wraps a stage failure so callers can see where the chain broke."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


# SQL subset

class SqlSyntaxError(NlsqlError):
    pass


class UnknownIdentifier(NlsqlError):
    pass


class TypeMismatch(NlsqlError):
    pass


# benchmark

class MalformedBenchmark(NlsqlError):
    pass


# optimizer

class DegenerateSurrogate(NlsqlError):
    """All observed objective values identical; surrogate is uninformative."""
