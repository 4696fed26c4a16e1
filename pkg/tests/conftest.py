import pytest

from nlsql.assets import asset_path
from nlsql.augment import load_comparatives, load_paraphrases
from nlsql.corpus import generate_corpus
from nlsql.schema import load_schema
from nlsql.templates import GeneratorConfig, load_lexicon, load_templates
from nlsql.valueindex import ValueIndex, load_embeddings

# ---------------------------------------------------------------- fixtures


@pytest.fixture(scope="session")
def patients_schema():
    return load_schema(asset_path("schemas", "patients", "schema.json"))


@pytest.fixture(scope="session")
def hospital2_schema():
    return load_schema(asset_path("schemas", "hospital2", "schema.json"))


@pytest.fixture(scope="session")
def hospital3_schema():
    return load_schema(asset_path("schemas", "hospital3", "schema.json"))


@pytest.fixture(scope="session")
def geo_schema():
    return load_schema(asset_path("schemas", "geo", "schema.json"))


@pytest.fixture(scope="session")
def city_schema():
    return load_schema(asset_path("schemas", "city_embed", "schema.json"))


@pytest.fixture(scope="session")
def mini_embeddings():
    return load_embeddings(asset_path("embeddings", "mini.txt"))


@pytest.fixture(scope="session")
def core_templates():
    return load_templates(asset_path("templates", "core.json"))


@pytest.fixture(scope="session")
def phrase_lexicon():
    return load_lexicon(asset_path("lexicons", "phrases.json"))


@pytest.fixture(scope="session")
def paraphrases():
    return load_paraphrases(asset_path("lexicons", "paraphrases.tsv"))


@pytest.fixture(scope="session")
def comparatives():
    return load_comparatives(asset_path("lexicons", "comparatives.json"))


@pytest.fixture(scope="session")
def patients_index(patients_schema):
    return ValueIndex(patients_schema)


@pytest.fixture(scope="session")
def default_corpus(patients_schema, core_templates, phrase_lexicon, paraphrases, comparatives):
    """Full default-config generation over the patients fixture; the same
    artifact several suites and the acceptance checks share."""
    return generate_corpus(
        patients_schema,
        core_templates,
        phrase_lexicon,
        GeneratorConfig(),
        paraphrases,
        comparatives,
    )


@pytest.fixture(scope="session")
def plain_corpus(patients_schema, core_templates, phrase_lexicon):
    """Small augmentation-free corpus for tests that want raw template output."""
    cfg = GeneratorConfig(size_slotfills=60, num_para=0, num_missing=0, randDrop_p=0.0)
    return generate_corpus(patients_schema, core_templates, phrase_lexicon, cfg)


# ------------------------------------------------- acceptance line report

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def accept():
    """Record one verdict line per acceptance criterion; the summary hook
    prints them after the run so they survive output capture."""

    def _record(name, ok, detail):
        verdict = "PASS" if ok else "FAIL"
        _ACCEPTANCE_LINES.append(f"{verdict}  {name}: {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.line(line)
