"""Hyper-parameter search over model and protocol settings.

The default strategy is seeded uniform random search; a grid strategy is
available for small discrete spaces. Parameters named ``s_t`` or ``warmup``
change the experiment; every other name is a model config key.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigurationError, NoViableConfigError, ParameterError, TCRCError
from ..models import config_from_dict
from .experiment import ExperimentConfig, run_experiment

logger = logging.getLogger(__name__)

__all__ = ["Param", "SearchSpace", "SearchResult", "RandomStrategy", "GridStrategy",
           "search", "apply_params", "STRATEGIES"]

EXPERIMENT_KEYS = ("s_t", "warmup")


@dataclass(frozen=True)
class Param:
    """One search dimension: ``float``, ``int`` or ``choice``."""

    kind: str
    low: float = 0.0
    high: float = 0.0
    log: bool = False
    values: tuple = ()
    num: int = 5  # grid points for float ranges

    def __post_init__(self):
        if self.kind not in ("float", "int", "choice"):
            raise ConfigurationError(f"unknown parameter kind {self.kind!r}")
        if self.kind == "choice":
            if not self.values:
                raise ConfigurationError("choice parameter needs values")
        elif self.low > self.high:
            raise ConfigurationError(f"empty range [{self.low}, {self.high}]")
        if self.log and not self.low > 0:
            raise ConfigurationError("log-scale range needs low > 0")

    @classmethod
    def from_spec(cls, spec) -> "Param":
        if isinstance(spec, list):
            return cls("choice", values=tuple(spec))
        if not isinstance(spec, dict):
            return cls("choice", values=(spec,))
        kind = spec.get("type", "float")
        if kind == "choice":
            return cls("choice", values=tuple(spec["values"]))
        return cls(kind, float(spec["low"]), float(spec["high"]), bool(spec.get("log", False)),
                   num=int(spec.get("num", 5)))

    def sample(self, rng: np.random.Generator):
        if self.kind == "choice":
            return self.values[int(rng.integers(len(self.values)))]
        if self.kind == "int":
            return int(rng.integers(int(self.low), int(self.high) + 1))
        if self.low == self.high:
            return float(self.low)
        if self.log:
            return float(10 ** rng.uniform(math.log10(self.low), math.log10(self.high)))
        return float(rng.uniform(self.low, self.high))

    def grid(self) -> list:
        if self.kind == "choice":
            return list(self.values)
        if self.kind == "int":
            return list(range(int(self.low), int(self.high) + 1))
        if self.log:
            return [float(x) for x in np.geomspace(self.low, self.high, self.num)]
        return [float(x) for x in np.linspace(self.low, self.high, self.num)]


@dataclass(frozen=True)
class SearchSpace:
    params: dict
    budget: int = 50
    seed: int = 0
    strategy: str = "random"
    trajectory_ids: Optional[tuple] = (0, 4, 9)
    finalists: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigurationError("search budget must be >= 1")
        if self.finalists < 0:
            raise ConfigurationError("finalists must be >= 0")
        object.__setattr__(self, "params", {k: v if isinstance(v, Param) else Param.from_spec(v)
                                            for k, v in self.params.items()})

    @classmethod
    def from_dict(cls, d: dict) -> "SearchSpace":
        ids = d.get("trajectory_ids", (0, 4, 9))
        return cls(params=d.get("params", {}), budget=int(d.get("budget", 50)),
                   seed=int(d.get("seed", 0)), strategy=d.get("strategy", "random"),
                   trajectory_ids=None if ids is None else tuple(ids),
                   finalists=int(d.get("finalists", 0)))


class RandomStrategy:
    """Independent uniform draws from a seeded PCG64 stream."""

    def __init__(self, space: SearchSpace):
        self.space = space

    def trials(self):
        rng = np.random.Generator(np.random.PCG64(self.space.seed))
        names = sorted(self.space.params)
        for _ in range(self.space.budget):
            yield {k: self.space.params[k].sample(rng) for k in names}


class GridStrategy:
    """Cartesian grid, truncated to the budget."""

    def __init__(self, space: SearchSpace):
        self.space = space

    def trials(self):
        names = sorted(self.space.params)
        grids = [self.space.params[k].grid() for k in names]
        for combo in itertools.islice(itertools.product(*grids), self.space.budget):
            yield dict(zip(names, combo))


STRATEGIES = {"random": RandomStrategy, "grid": GridStrategy}


@dataclass
class SearchResult:
    best: ExperimentConfig
    best_params: dict
    best_score: float
    log: list = field(default_factory=list)


def apply_params(template: ExperimentConfig, params: dict) -> ExperimentConfig:
    """Return ``template`` with ``params`` substituted."""
    model = template.model.to_dict()
    exp = {}
    for k, v in params.items():
        if k in EXPERIMENT_KEYS:
            exp[k] = int(v)
        else:
            model[k] = v
    return replace(template, model=config_from_dict(model), **exp)


def _score(cfg: ExperimentConfig, threads: int):
    records = run_experiment(cfg, threads=threads)
    bad = [r for r in records if not r.ok]
    if bad:
        return math.inf, bad[0].error or "divergent forecast"
    return float(np.mean([r.mse for r in records])), None


def search(space: SearchSpace, template: ExperimentConfig, threads: int = 1,
           log_path=None) -> SearchResult:
    """Evaluate ``space.budget`` trials and return the lowest mean MSE.

    Trials are scored on ``space.trajectory_ids``. A trial with any failed or
    divergent run is non-viable (score ``inf``). Ties go to the earlier
    trial. With ``space.finalists = k > 0`` the ``k`` best viable trials are
    scored again on the template's full trajectory set and the winner is
    picked by that score instead.
    """
    if space.strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown search strategy {space.strategy!r}")
    strategy = STRATEGIES[space.strategy](space)
    log = []
    configs = {}
    for i, params in enumerate(strategy.trials()):
        entry = {"trial": i, "params": params, "mean_mse": math.inf, "viable": False, "error": None}
        try:
            cfg = apply_params(template, params)
            configs[i] = cfg
            if space.trajectory_ids is not None:
                cfg = replace(cfg, trajectory_ids=space.trajectory_ids)
            entry["mean_mse"], entry["error"] = _score(cfg, threads)
            entry["viable"] = entry["error"] is None
        except (TCRCError, ValueError) as exc:
            entry["error"] = str(exc)
        log.append(entry)
        logger.info("trial %d: %s -> %s", i, params, entry["mean_mse"])
    ranked = sorted((e for e in log if e["viable"]), key=lambda e: (e["mean_mse"], e["trial"]))
    key = "mean_mse"
    if space.finalists and space.trajectory_ids is not None and ranked:
        key = "final_mse"
        for e in ranked[:space.finalists]:
            e["final_mse"], err = _score(configs[e["trial"]], threads)
            if err is not None:
                e["final_error"] = err
        ranked = sorted((e for e in ranked[:space.finalists] if math.isfinite(e["final_mse"])),
                        key=lambda e: (e["final_mse"], e["trial"]))
    if log_path is not None:
        write_log(log, log_path)
    if not ranked:
        raise NoViableConfigError(f"all {len(log)} trials failed or diverged", log)
    win = ranked[0]
    return SearchResult(configs[win["trial"]], win["params"], win[key], log)


def write_log(log, path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(log, indent=1, default=_json_default) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write search log {path}: {exc}") from exc


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(type(o).__name__)
