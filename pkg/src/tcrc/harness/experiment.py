"""Experiment configs, evaluation runs and aggregation."""

from __future__ import annotations

import functools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Optional, Union

import numpy as np

from ..errors import ConfigurationError, ParameterError, TCRCError
from ..mackey_glass import DEFAULT_DISCARD, MGParams, integrate_mg, make_trajectories, z_normalize
from ..models import ESNConfig, TCRCConfig, build_model, config_from_dict, config_hash
from ..readout import fit_tikhonov, forecast_closed_loop

logger = logging.getLogger(__name__)

__all__ = [
    "PAPER_TAUS",
    "DEFAULT_SEEDS",
    "ExperimentConfig",
    "ResultRecord",
    "SummaryRow",
    "load_dataset",
    "run_single",
    "run_experiment",
    "aggregate",
]

PAPER_TAUS = (5, 10, 15, 17, 20, 25)
DEFAULT_SEEDS = tuple(range(15))
DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class ExperimentConfig:
    """One evaluation protocol.

    ``samples`` is the generated series length per tau before windowing; when
    ``None`` it is the minimum that fits ``trajectories`` windows. The
    effective warm-up is ``max(warmup, model.required_warmup)``.
    ``trajectory_ids`` restricts evaluation to a subset of the windows
    without changing their layout.
    """

    model: Union[TCRCConfig, ESNConfig]
    taus: tuple = (17,)
    mg: MGParams = field(default_factory=MGParams)
    samples: Optional[int] = None
    discard: int = DEFAULT_DISCARD
    trajectories: int = 10
    s_t: int = 1000
    s_p: int = 286
    warmup: int = 0
    seeds: tuple = DEFAULT_SEEDS
    trajectory_ids: Optional[tuple] = None
    output: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(float(t) if not float(t).is_integer() else int(t) for t in self.taus))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.trajectory_ids is not None:
            object.__setattr__(self, "trajectory_ids", tuple(int(i) for i in self.trajectory_ids))
            if any(not 0 <= i < self.trajectories for i in self.trajectory_ids):
                raise ConfigurationError("trajectory_ids out of range")
        if self.s_p < 1 or self.s_t < 1 or self.trajectories < 1 or self.warmup < 0:
            raise ConfigurationError("s_p, s_t and trajectories must be >= 1 and warmup >= 0")
        if not self.taus:
            raise ConfigurationError("at least one tau is required")
        if self.model.is_random and not self.seeds:
            raise ConfigurationError("random variants need at least one seed")

    @property
    def effective_warmup(self) -> int:
        return max(self.warmup, self.model.required_warmup)

    @property
    def window(self) -> int:
        return self.effective_warmup + self.s_t + self.s_p

    @property
    def n_samples(self) -> int:
        return self.samples if self.samples is not None else self.trajectories * self.window

    @property
    def run_seeds(self) -> tuple:
        return self.seeds if self.model.is_random else (DETERMINISTIC,)

    def to_dict(self) -> dict:
        mg = self.mg.to_dict()
        mg.pop("tau")
        d = {
            "model": self.model.to_dict(),
            "dataset": {"taus": list(self.taus), "mg": mg, "samples": self.samples,
                        "discard": self.discard},
            "trajectories": self.trajectories,
            "s_t": self.s_t,
            "s_p": self.s_p,
            "warmup": self.warmup,
            "seeds": list(self.seeds),
        }
        if self.trajectory_ids is not None:
            d["trajectory_ids"] = list(self.trajectory_ids)
        if self.output is not None:
            d["output"] = self.output
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if "model" not in d:
            raise ConfigurationError("experiment config needs a 'model' section")
        ds = d.get("dataset", {})
        mg = MGParams.from_dict({**ds.get("mg", {}), "tau": max(ds.get("taus", [17]))})
        kwargs = dict(
            model=config_from_dict(d["model"]),
            taus=tuple(ds.get("taus", (17,))),
            mg=mg,
            samples=ds.get("samples"),
            discard=ds.get("discard", DEFAULT_DISCARD),
        )
        for key in ("trajectories", "s_t", "s_p", "warmup", "output"):
            if key in d:
                kwargs[key] = d[key]
        if "seeds" in d:
            kwargs["seeds"] = tuple(d["seeds"])
        if d.get("trajectory_ids") is not None:
            kwargs["trajectory_ids"] = tuple(d["trajectory_ids"])
        unknown = set(d) - {"model", "dataset", "trajectories", "s_t", "s_p", "warmup", "seeds",
                            "trajectory_ids", "output", "search"}
        if unknown:
            raise ConfigurationError(f"unknown experiment keys: {sorted(unknown)}")
        return cls(**kwargs)


@dataclass
class ResultRecord:
    config_hash: str
    variant: str
    activation: str
    tau: float
    trajectory: int
    seed: Union[int, str]
    mse: float
    wall_clock_s: float
    divergent: bool = False
    timestamp: Optional[str] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and not self.divergent and math.isfinite(self.mse)

    def sort_key(self):
        seed = (0, self.seed, "") if isinstance(self.seed, int) else (1, 0, str(self.seed))
        return (self.variant, self.activation, float(self.tau), self.trajectory, seed)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SummaryRow:
    variant: str
    activation: str
    tau: float
    n_runs: int
    mean_mse: float
    std_mse: float
    mean_wall_clock_s: float
    divergent_count: int = 0
    failed_count: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@functools.lru_cache(maxsize=16)
def load_dataset(mg: MGParams, samples: int, discard: int):
    """Generate and z-score one Mackey-Glass series (cached)."""
    return z_normalize(integrate_mg(mg, samples, discard))


def run_single(model_cfg, train, test, s_t: int) -> tuple:
    """Train on ``train`` and forecast ``len(test)`` steps.

    Returns ``(ForecastResult, wall_clock_seconds)``.
    """
    t0 = time.perf_counter()
    model = build_model(model_cfg)
    states = model.training_states(train, s_t)
    weights = fit_tikhonov(states, np.asarray(train)[-s_t:], model_cfg.beta)
    result = forecast_closed_loop(model, weights, train, len(test), np.asarray(test))
    return result, time.perf_counter() - t0


def _task(cfg: ExperimentConfig, tau, traj_id, traj, seed):
    model_cfg = cfg.model if seed == DETERMINISTIC else cfg.model.with_seed(seed)
    base = dict(config_hash=config_hash(cfg.to_dict()), variant=model_cfg.variant,
                activation=model_cfg.activation.name, tau=tau, trajectory=traj_id, seed=seed)
    try:
        result, wall = run_single(model_cfg, traj.train.values, traj.test.values, cfg.s_t)
    except TCRCError as exc:
        logger.warning("run tau=%s traj=%s seed=%s failed: %s", tau, traj_id, seed, exc)
        return ResultRecord(**base, mse=math.nan, wall_clock_s=math.nan, error=str(exc),
                            timestamp=_now())
    divergent = result.divergent or not math.isfinite(result.mse)
    return ResultRecord(**base, mse=result.mse, wall_clock_s=wall, divergent=divergent,
                        timestamp=_now())


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list:
    """Evaluate every (tau, trajectory, seed) combination of ``cfg``.

    Deterministic variants run once per trajectory with seed
    ``"deterministic"``. Failures are recorded per run and never abort the
    sweep. Output is sorted so it does not depend on scheduling.
    """
    jobs = []
    failed = []
    ids = cfg.trajectory_ids if cfg.trajectory_ids is not None else range(cfg.trajectories)
    for tau in cfg.taus:
        mg = replace(cfg.mg, tau=tau)
        try:
            series = load_dataset(mg, cfg.n_samples, cfg.discard)
            trajs = make_trajectories(series, cfg.trajectories, cfg.s_t, cfg.s_p, cfg.effective_warmup)
        except TCRCError as exc:
            logger.warning("dataset for tau=%s unusable: %s", tau, exc)
            for i in ids:
                for seed in cfg.run_seeds:
                    failed.append(ResultRecord(
                        config_hash=config_hash(cfg.to_dict()), variant=cfg.model.variant,
                        activation=cfg.model.activation.name, tau=tau, trajectory=i, seed=seed,
                        mse=math.nan, wall_clock_s=math.nan, error=str(exc), timestamp=_now()))
            continue
        for i in ids:
            for seed in cfg.run_seeds:
                jobs.append((cfg, tau, i, trajs[i], seed))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda j: _task(*j), jobs))
    else:
        records = [_task(*j) for j in jobs]
    return sorted(records + failed, key=ResultRecord.sort_key)


def aggregate(records) -> list:
    """Mean/std MSE per (variant, activation, tau).

    Divergent and failed runs are counted separately and left out of the
    mean; a group with no usable run gets ``nan``.
    """
    records = list(records)
    if not records:
        raise ParameterError("cannot aggregate an empty record list")
    groups: dict = {}
    for r in records:
        groups.setdefault((r.variant, r.activation, float(r.tau)), []).append(r)
    rows = []
    for (variant, act, tau), recs in sorted(groups.items()):
        good = [r for r in recs if r.ok]
        errs = np.array([r.mse for r in good])
        walls = np.array([r.wall_clock_s for r in recs if math.isfinite(r.wall_clock_s)])
        rows.append(SummaryRow(
            variant=variant, activation=act, tau=tau, n_runs=len(good),
            mean_mse=float(errs.mean()) if errs.size else math.nan,
            std_mse=float(errs.std()) if errs.size else math.nan,
            mean_wall_clock_s=float(walls.mean()) if walls.size else math.nan,
            divergent_count=sum(1 for r in recs if r.divergent),
            failed_count=sum(1 for r in recs if r.error is not None),
        ))
    return rows
