"""Schema-driven NL-to-SQL toolkit.

Synthesizes an NL-SQL training corpus from templates over a database
schema, translates questions through an anonymize -> translate -> repair
chain with a pluggable model, and evaluates with strict and relaxed
correctness. See the README for the module map.
"""

__version__ = "0.1.0"

from .errors import NlsqlError
from .pipeline import Pipeline, TranslationOutcome
from .schema import SchemaBundle, load_schema
from .templates import GeneratorConfig
from .translate import RetrievalModel, TranslationModel

__all__ = [
    "GeneratorConfig",
    "NlsqlError",
    "Pipeline",
    "RetrievalModel",
    "SchemaBundle",
    "TranslationModel",
    "TranslationOutcome",
    "__version__",
    "load_schema",
]
