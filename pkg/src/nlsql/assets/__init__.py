"""Bundled fixtures: schemas, lexicons, templates, benchmarks, configs."""

from pathlib import Path

_ROOT = Path(__file__).parent


def asset_path(*parts: str) -> Path:
    """Absolute path of a bundled asset, e.g. asset_path("schemas", "geo")."""
    p = _ROOT.joinpath(*parts)
    if not p.exists():
        raise FileNotFoundError(f"no bundled asset at {'/'.join(parts)}")
    return p
