"""Experiment config files: JSON documents mirroring SweepSpec.

Schema version 1. Unknown keys are rejected anywhere in the document so a
typo never silently changes an experiment.
"""

from __future__ import annotations

import json
from pathlib import Path

from .analysis import SweepSpec, VARIED_PARAMS
from .errors import ConfigError, DegenerateParams
from .sgns import TrainConfig
from .walks import WalkConfig

__all__ = ["parse_experiment_config", "load_experiment_config"]

_TOP_KEYS = {
    "schema", "model", "varied", "grid", "fixed", "instances", "kernels",
    "weight_mode", "null_target", "walk", "train", "seed", "deterministic", "output",
}
_FIXED_KEYS = {
    "nodes", "avg_degree", "weights", "ratio", "beta", "features",
    "sbm_weight_mode", "walks_per_node", "walk_length", "cache_dir",
}
_WALK_KEYS = {"kernel", "walks_per_node", "walk_length", "seed"}
_TRAIN_KEYS = {
    "dim", "window", "negatives", "epochs", "initial_lr", "final_lr",
    "architecture", "subsample", "workers", "seed",
}


def _reject_unknown(doc: dict, allowed: set, where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}; allowed: {sorted(allowed)}")


def parse_experiment_config(doc: dict) -> tuple[SweepSpec, str | None]:
    """Validate a config dict and build the SweepSpec plus optional output path."""
    if not isinstance(doc, dict):
        raise ConfigError(f"config must be a JSON object, got {type(doc).__name__}")
    if doc.get("schema") != 1:
        raise ConfigError(f"config must declare \"schema\": 1, got {doc.get('schema')!r}")
    _reject_unknown(doc, _TOP_KEYS, "config")
    for req in ("model", "varied", "grid"):
        if req not in doc:
            raise ConfigError(f"config is missing required key {req!r}")
    if doc["varied"] not in VARIED_PARAMS:
        raise ConfigError(f"varied must be one of {VARIED_PARAMS}, got {doc['varied']!r}")
    if not isinstance(doc["grid"], list) or not doc["grid"]:
        raise ConfigError("grid must be a non-empty list")

    fixed = doc.get("fixed", {})
    if not isinstance(fixed, dict):
        raise ConfigError("fixed must be an object")
    _reject_unknown(fixed, _FIXED_KEYS, "fixed")

    walk_doc = dict(doc.get("walk", {}))
    _reject_unknown(walk_doc, _WALK_KEYS, "walk")
    train_doc = dict(doc.get("train", {}))
    _reject_unknown(train_doc, _TRAIN_KEYS, "train")

    try:
        spec = SweepSpec(
            model=doc["model"],
            varied=doc["varied"],
            grid=tuple(doc["grid"]),
            fixed=fixed,
            instances=int(doc.get("instances", 10)),
            kernels=tuple(doc.get("kernels", ("rw", "srw", "wrw"))),
            weight_mode=doc.get("weight_mode", "original"),
            null_target=doc.get("null_target", "seen"),
            walk=WalkConfig(**walk_doc),
            train=TrainConfig(**train_doc),
            seed=int(doc.get("seed", 0)),
            deterministic=bool(doc.get("deterministic", True)),
        )
    except (TypeError, ValueError, DegenerateParams) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    return spec, doc.get("output")


def load_experiment_config(path: str | Path) -> tuple[SweepSpec, str | None]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_experiment_config(doc)
