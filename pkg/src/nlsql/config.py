"""Service and CLI configuration: JSON file plus NLQ_-prefixed env overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .pipeline import DEFAULT_DELTA_JAC
from .valueindex import DEFAULT_TAU_EMBED

ENV_PREFIX = "NLQ_"


@dataclass
class AppConfig:
    schema: str = ""
    corpus: str = ""
    lexicons: str = ""
    embeddings: str = ""
    tau_embed: float = DEFAULT_TAU_EMBED
    delta_jac: float = DEFAULT_DELTA_JAC
    port: int = 8080
    seed: int = 0
    static_dir: str = ""


def load_config(path: str | Path | None = None, env: dict | None = None) -> AppConfig:
    """Read the JSON config (if given) and apply NLQ_ env overrides on top."""
    env = os.environ if env is None else env
    values: dict = {}
    known = {f.name: f.type for f in fields(AppConfig)}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        for key, val in raw.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = val
    for f in fields(AppConfig):
        env_key = ENV_PREFIX + f.name.upper()
        if env_key in env:
            values[f.name] = env[env_key]

    cfg = AppConfig()
    for f in fields(AppConfig):
        if f.name not in values:
            continue
        raw_val = values[f.name]
        current = getattr(cfg, f.name)
        try:
            if isinstance(current, int) and not isinstance(current, bool):
                setattr(cfg, f.name, int(raw_val))
            elif isinstance(current, float):
                setattr(cfg, f.name, float(raw_val))
            else:
                setattr(cfg, f.name, str(raw_val))
        except (TypeError, ValueError):
            raise ValueError(f"config key {f.name!r}: bad value {raw_val!r}") from None
    return cfg
