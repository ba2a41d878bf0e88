"""Experiment configuration read from an INI file.

Schema::

    [experiment]
    model = girg            ; girg | girg_threshold | sfp | hrg | hrg_threshold
    n_grid = 4096, 16384    ; strictly increasing; SFP: window radii m
    length_law = exp:1      ; grammar of girgfpp.dist.parse_distribution
    pairs = 300             ; pairs per (n, replica); SFP: one pair per replica
    replicas = 1
    seed = 1
    workers = 1
    output = distances.csv
    max_edges = 50000000    ; resource cap per graph (exit code 3 when exceeded)

    [model]                 ; keyword arguments of the model's parameter class
    d = 2
    tau = 2.5
    alpha = 1.95
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .dist import EdgeLengthDistribution, parse_distribution
from .genmodel import GirgParams, HrgParams, SfpParams

MODELS = ("girg", "girg_threshold", "sfp", "hrg", "hrg_threshold")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    n_grid: tuple
    length_law: str
    pairs: int = 300
    replicas: int = 1
    seed: int = 1
    workers: int = 1
    output: str = "distances.csv"
    max_edges: int = 50_000_000
    model_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError("n_grid must be nonempty and strictly increasing")
        if self.pairs < 1 or self.replicas < 1 or self.workers < 1 or self.max_edges < 1:
            raise ConfigError("pairs, replicas, workers and max_edges must be >= 1")
        try:
            parse_distribution(self.length_law)
            self.params_for(self.n_grid[0])
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def dist(self) -> EdgeLengthDistribution:
        return parse_distribution(self.length_law)

    def params_for(self, n: int):
        p = dict(self.model_params)
        if self.model in ("girg", "girg_threshold"):
            p.setdefault("g_choice", "threshold" if self.model == "girg_threshold" else "canonical")
            return GirgParams(**p)
        if self.model == "sfp":
            return SfpParams(**{**p, "m": int(n)})
        if self.model == "hrg_threshold":
            p["T_H"] = None
        return HrgParams(**{**p, "n": int(n)})


def _coerce(key: str, value: str):
    v = value.strip()
    if key == "g_choice":
        return v
    if key in ("d", "m"):
        return int(v)
    if v.lower() in ("none", ""):
        return None
    return float(v)


def load_config(path: str | Path) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep parameter names such as alpha_H
    try:
        if not cp.read(path):
            raise ConfigError(f"cannot read {path}")
        if "experiment" not in cp:
            raise ConfigError("missing [experiment] section")
        ex = cp["experiment"]
        known = {"model", "n_grid", "length_law", "pairs", "replicas", "seed", "workers", "output", "max_edges"}
        unknown = set(ex) - known
        if unknown:
            raise ConfigError(f"unknown keys in [experiment]: {sorted(unknown)}")
        params = {k: _coerce(k, v) for k, v in cp["model"].items()} if "model" in cp else {}
        return ExperimentConfig(
            model=ex.get("model", "girg").strip(),
            n_grid=tuple(int(float(x)) for x in ex.get("n_grid", "").split(",") if x.strip()),
            length_law=ex.get("length_law", "exp:1").strip(),
            pairs=ex.getint("pairs", 300),
            replicas=ex.getint("replicas", 1),
            seed=ex.getint("seed", 1),
            workers=ex.getint("workers", 1),
            output=ex.get("output", "distances.csv").strip(),
            max_edges=int(float(ex.get("max_edges", "50000000"))),
            model_params=params,
        )
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
