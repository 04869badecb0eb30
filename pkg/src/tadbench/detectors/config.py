"""Detector configuration: kind, hyperparameters, seed, and serialization.

A config is a plain value object. Hyperparameters are validated per kind at
construction; unknown names are rejected so a serialized config replays
exactly. ``config_hash`` fingerprints the canonical JSON form and is what
the bench module mixes into its per-cell seeds.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Any, Mapping

from ..errors import ConfigError

DETECTOR_KINDS: tuple[str, ...] = (
    "ocsvm",
    "iforest",
    "lof",
    "pca",
    "knn",
    "kde",
    "ecod",
    "ae",
    "dsvdd",
)

# Per-kind hyperparameter defaults. Values mirror the design decisions:
# k=3, n_neighbors=30, 100 trees at subsample 256, nu=0.5 with the "scale"
# gamma rule, 90% explained variance capped at 256 components, Scott
# bandwidth, and the fixed net training recipe for ae/dsvdd.
_DEFAULTS: dict[str, dict[str, Any]] = {
    "knn": {"k": 3},
    "lof": {"n_neighbors": 30},
    "iforest": {"tree_count": 100, "subsample": 256},
    "ocsvm": {"nu": 0.5, "gamma": "scale"},
    "pca": {"variance_threshold": 0.9, "max_components": 256},
    "kde": {"bandwidth": "scott"},
    "ecod": {},
    "ae": {"epochs": 100, "learning_rate": 1e-3, "batch_size": 128},
    "dsvdd": {
        "epochs": 100,
        "learning_rate": 1e-3,
        "batch_size": 128,
        "weight_decay": 1e-6,
    },
}

_MAX_SEED = 2**64


def _check_count(kind: str, name: str, value: Any, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ConfigError(f"{kind}.{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ConfigError(f"{kind}.{name} must be >= {minimum}, got {value}")
    return value


def _check_positive(kind: str, name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ConfigError(f"{kind}.{name} must be a number, got {value!r}")
    value = float(value)
    if not value > 0:
        raise ConfigError(f"{kind}.{name} must be positive, got {value}")
    return value


def _validate_params(kind: str, params: dict[str, Any]) -> dict[str, Any]:
    if kind == "knn":
        params["k"] = _check_count(kind, "k", params["k"])
    elif kind == "lof":
        params["n_neighbors"] = _check_count(kind, "n_neighbors", params["n_neighbors"])
    elif kind == "iforest":
        params["tree_count"] = _check_count(kind, "tree_count", params["tree_count"])
        params["subsample"] = _check_count(kind, "subsample", params["subsample"], 2)
    elif kind == "ocsvm":
        nu = _check_positive(kind, "nu", params["nu"])
        if nu > 1:
            raise ConfigError(f"ocsvm.nu must lie in (0, 1], got {nu}")
        params["nu"] = nu
        gamma = params["gamma"]
        if gamma != "scale":
            params["gamma"] = _check_positive(kind, "gamma", gamma)
    elif kind == "pca":
        vt = _check_positive(kind, "variance_threshold", params["variance_threshold"])
        if vt > 1:
            raise ConfigError(f"pca.variance_threshold must lie in (0, 1], got {vt}")
        params["variance_threshold"] = vt
        params["max_components"] = _check_count(kind, "max_components", params["max_components"])
    elif kind == "kde":
        bw = params["bandwidth"]
        if bw != "scott":
            params["bandwidth"] = _check_positive(kind, "bandwidth", bw)
    elif kind in ("ae", "dsvdd"):
        params["epochs"] = _check_count(kind, "epochs", params["epochs"], 0)
        params["learning_rate"] = _check_positive(kind, "learning_rate", params["learning_rate"])
        params["batch_size"] = _check_count(kind, "batch_size", params["batch_size"])
        if kind == "dsvdd":
            wd = params["weight_decay"]
            if isinstance(wd, bool) or not isinstance(wd, Real) or float(wd) < 0:
                raise ConfigError(f"dsvdd.weight_decay must be >= 0, got {wd!r}")
            params["weight_decay"] = float(wd)
    return params


@dataclass(frozen=True)
class DetectorConfig:
    """Everything needed to rebuild one detector: kind, params, seed, scaling."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0
    standardize: bool = False

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ConfigError(
                f"unknown detector kind {self.kind!r}; expected one of {DETECTOR_KINDS}"
            )
        merged = dict(_DEFAULTS[self.kind])
        extra = set(self.params) - set(merged)
        if extra:
            raise ConfigError(
                f"unknown hyperparameters for {self.kind}: {sorted(extra)}"
            )
        merged.update(self.params)
        merged = _validate_params(self.kind, merged)
        if isinstance(self.seed, bool) or not isinstance(self.seed, Integral):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        seed = int(self.seed)
        if not 0 <= seed < _MAX_SEED:
            raise ConfigError(f"seed must fit in 64 bits, got {seed}")
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "standardize", bool(self.standardize))
        object.__setattr__(self, "params", merged)

    def with_seed(self, seed: int) -> "DetectorConfig":
        return DetectorConfig(
            kind=self.kind, params=dict(self.params), seed=seed, standardize=self.standardize
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "seed": self.seed,
            "standardize": self.standardize,
        }

    def to_json(self) -> str:
        """Canonical JSON form: sorted keys, no insignificant whitespace."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "DetectorConfig":
        if not isinstance(doc, Mapping) or "kind" not in doc:
            raise ConfigError("detector config document must carry a 'kind' key")
        known = {"kind", "params", "seed", "standardize"}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(
            kind=doc["kind"],
            params=dict(doc.get("params", {})),
            seed=doc.get("seed", 0),
            standardize=doc.get("standardize", False),
        )

    @classmethod
    def from_json(cls, text: str) -> "DetectorConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from exc
        return cls.from_dict(doc)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def default_config(kind: str, seed: int = 0) -> DetectorConfig:
    return DetectorConfig(kind=kind, seed=seed)
