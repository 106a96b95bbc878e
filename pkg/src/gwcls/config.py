"""Flat ``key = value`` configuration files.

Example::

    # Model A with the default uniform immigration
    model = general
    alpha = 0.3
    n_values = 200, 2000
    replicas = 5000
    seed = 7

Laws are written inline as ``x1 x2 prob`` triples separated by ``;``::

    model = custom
    offspring1 = 0 0 0.35; 1 0 0.30; 0 2 0.35
    offspring2 = 0 0 0.35; 0 1 0.30; 2 0 0.35
    immigration = 0 0 0.25; 0 1 0.25; 1 0 0.25; 1 1 0.25

Recognised keys are listed in :data:`SCHEMA`.
"""

from __future__ import annotations

from typing import Dict, Iterable, Optional

from .errors import ConfigError
from .model import (
    FiniteLaw2D,
    ModelSpec,
    build_model,
    model_equal_pair,
    model_equal_pair_null_immigration,
    model_general,
    model_unit_total,
)

__all__ = ["SCHEMA", "MODEL_NAMES", "parse_config", "load_config", "parse_law", "model_from_config"]

# key -> converter
SCHEMA = {
    "model": str,
    "alpha": float,
    "offspring1": str,
    "offspring2": str,
    "immigration": str,
    "n": int,
    "n_values": "int_list",
    "replicas": int,
    "limit_paths": int,
    "sde_steps": int,
    "seed": int,
    "threads": int,
    "target": str,
    "order": int,
    "ks": "int_list",
    "band": float,
    "ks_tol": float,
    "var_tol": float,
    "monotone_slack": float,
    "existence_min": float,
    "output": str,
}

MODEL_NAMES = ("general", "unit_total", "equal_pair", "equal_pair_null", "custom")


def _convert(key: str, raw: str):
    kind = SCHEMA[key]
    try:
        if kind == "int_list":
            return [int(tok) for tok in raw.replace(",", " ").split()]
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def parse_config(text: str) -> Dict[str, object]:
    """Parse config text into a dict of typed values."""
    out: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _convert(key, raw)
    return out


def load_config(path: str) -> Dict[str, object]:
    with open(path) as fh:
        return parse_config(fh.read())


def parse_law(text: str) -> FiniteLaw2D:
    """``"x1 x2 p; x1 x2 p; ..."`` -> FiniteLaw2D."""
    atoms = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if len(parts) != 3:
            raise ConfigError(f"atom {chunk!r} is not an 'x1 x2 prob' triple")
        try:
            atoms.append(((int(parts[0]), int(parts[1])), float(parts[2])))
        except ValueError as exc:
            raise ConfigError(f"atom {chunk!r} is not an 'x1 x2 prob' triple") from exc
    return FiniteLaw2D(atoms)


def model_from_config(cfg: Dict[str, object]) -> ModelSpec:
    name = str(cfg.get("model", "general"))
    imm: Optional[FiniteLaw2D] = parse_law(cfg["immigration"]) if "immigration" in cfg else None
    if name == "general":
        return model_general(float(cfg.get("alpha", 0.3)), imm)
    if name == "unit_total":
        return model_unit_total(float(cfg.get("alpha", 0.6)), imm)
    if name == "equal_pair":
        return model_equal_pair(imm)
    if name == "equal_pair_null":
        if imm is not None:
            raise ConfigError("equal_pair_null fixes its own immigration law")
        return model_equal_pair_null_immigration()
    if name == "custom":
        missing = [k for k in ("offspring1", "offspring2", "immigration") if k not in cfg]
        if missing:
            raise ConfigError(f"custom model needs {', '.join(missing)}")
        return build_model(parse_law(cfg["offspring1"]), parse_law(cfg["offspring2"]), imm)
    raise ConfigError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
