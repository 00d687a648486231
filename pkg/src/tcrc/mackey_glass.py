"""Mackey-Glass data generation, z-scoring and train/test windowing.

The delay equation is::

    dx/dt = beta * theta * x(t - tau) / (theta**n + x(t - tau)**n) - gamma * x(t)

integrated with fixed-step RK4. The delayed value comes from a ring buffer of
past states and is held constant over one RK4 step, so ``tau`` must be an
integer multiple of ``dt``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import kernels
from .errors import CapacityError, DegenerateSeriesError, DivergenceError, ParameterError

__all__ = [
    "MGParams",
    "TimeSeries",
    "Trajectory",
    "TrajectorySet",
    "integrate_mg",
    "z_normalize",
    "make_trajectories",
    "write_series",
    "read_series",
    "DEFAULT_DISCARD",
]

DEFAULT_DISCARD = 1000


@dataclass(frozen=True)
class MGParams:
    """Parameters of one Mackey-Glass trajectory.

    The defaults ``[beta_mg, theta, gamma, n_mg] = [0.2, 1, 0.1, 10]`` are the
    usual literature values. ``dt=0.1`` with ``sample_stride=10`` emits one
    sample per time unit.
    """

    beta_mg: float = 0.2
    theta: float = 1.0
    gamma: float = 0.1
    n_mg: int = 10
    tau: float = 17.0
    dt: float = 0.1
    sample_stride: int = 10
    history_init: float = 1.2

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.tau < self.dt:
            raise ParameterError(f"tau ({self.tau}) must be >= dt ({self.dt})")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ParameterError(f"sample_stride must be a positive integer, got {self.sample_stride}")
        if int(self.n_mg) != self.n_mg or self.n_mg < 1:
            raise ParameterError(f"n_mg must be a positive integer, got {self.n_mg}")
        for name in ("beta_mg", "theta", "gamma", "history_init"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @property
    def delay_steps(self) -> int:
        return int(round(self.tau / self.dt))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MGParams":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    values: np.ndarray
    meta: Union[MGParams, str] = "external"
    normalized: bool = False
    norm_stats: Optional[tuple] = None  # (mu, std)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ParameterError("series must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(v)):
            raise ParameterError("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.normalized and (self.norm_stats is None or not self.norm_stats[1] > 0):
            raise ParameterError("normalized series needs norm_stats with std > 0")

    def __len__(self):
        return self.values.size

    def __getitem__(self, item):
        return self.values[item]

    def window(self, start: int, stop: int) -> "TimeSeries":
        return replace(self, values=self.values[start:stop])

    def metadata(self) -> dict:
        d = {"source": "external"} if isinstance(self.meta, str) else {"source": "mackey-glass", **self.meta.to_dict()}
        d["normalized"] = self.normalized
        if self.norm_stats is not None:
            d["mu"], d["std"] = (float(x) for x in self.norm_stats)
        return d


@dataclass(frozen=True)
class Trajectory:
    train: TimeSeries
    test: TimeSeries
    offset: int


@dataclass(frozen=True)
class TrajectorySet:
    trajectories: list = field(default_factory=list)

    @property
    def offsets(self) -> list:
        return [t.offset for t in self.trajectories]

    def __len__(self):
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def __getitem__(self, i):
        return self.trajectories[i]


def integrate_mg(params: MGParams, total_samples: int, discard: int = DEFAULT_DISCARD) -> TimeSeries:
    """Integrate the delay equation and return ``total_samples`` samples.

    The first ``discard`` emitted samples (the transient) are dropped. The
    pre-history on ``[-tau, 0]`` is the constant ``params.history_init``.

    Raises
    ------
    ParameterError
        If ``total_samples < 1`` or ``discard < 0``.
    DivergenceError
        If the state becomes non-finite.
    """
    if int(total_samples) != total_samples or total_samples < 1:
        raise ParameterError(f"total_samples must be >= 1, got {total_samples}")
    if int(discard) != discard or discard < 0:
        raise ParameterError(f"discard must be >= 0, got {discard}")
    n_emit = int(total_samples) + int(discard)
    values, n_ok = kernels.mg_rk4(
        float(params.beta_mg), float(params.theta), float(params.gamma), float(params.n_mg),
        float(params.dt), params.delay_steps, int(params.sample_stride),
        float(params.history_init), n_emit,
    )
    if n_ok < n_emit:
        raise DivergenceError(f"Mackey-Glass state became non-finite at sample {n_ok}")
    return TimeSeries(values[int(discard):], meta=params)


def z_normalize(series: TimeSeries) -> TimeSeries:
    """Standardize with the mean and population std of the whole series."""
    v = series.values
    if v.size < 2:
        raise DegenerateSeriesError("need at least two values to standardize")
    mu = float(np.mean(v))
    std = float(np.std(v))
    if not std > 1e-12 * max(abs(mu), np.finfo(float).tiny):
        raise DegenerateSeriesError("series has zero standard deviation")
    return TimeSeries((v - mu) / std, meta=series.meta, normalized=True, norm_stats=(mu, std))


def make_trajectories(series: TimeSeries, count: int = 10, s_t: int = 1000,
                      s_p: int = 286, warmup: int = 0) -> TrajectorySet:
    """Cut ``count`` disjoint (train, test) window pairs from ``series``.

    Each window spans ``warmup + s_t`` training samples immediately followed
    by ``s_p`` test samples. Start offsets are evenly spaced, first at 0.
    """
    for name, val, lo in (("count", count, 1), ("s_t", s_t, 1), ("s_p", s_p, 1), ("warmup", warmup, 0)):
        if int(val) != val or val < lo:
            raise ParameterError(f"{name} must be an integer >= {lo}, got {val}")
    n_train = warmup + s_t
    width = n_train + s_p
    n = len(series)
    if n < count * width:
        raise CapacityError(
            f"series of length {n} cannot hold {count} disjoint windows of length {width}"
        )
    if count == 1:
        offsets = [0]
    else:
        offsets = [i * (n - width) // (count - 1) for i in range(count)]
    trajs = [
        Trajectory(series.window(o, o + n_train), series.window(o + n_train, o + width), o)
        for o in offsets
    ]
    return TrajectorySet(trajs)


def write_series(path, series: TimeSeries) -> None:
    """Write one value per line with a ``#``-prefixed JSON header."""
    path = Path(path)
    lines = ["# " + json.dumps(series.metadata(), sort_keys=True)]
    lines += [repr(float(x)) for x in series.values]
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write series to {path}: {exc}") from exc


def read_series(path) -> TimeSeries:
    path = Path(path)
    meta: Union[MGParams, str] = "external"
    normalized, stats = False, None
    values = []
    with path.open() as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if i == 0:
                    header = json.loads(line[1:])
                    if header.get("source") == "mackey-glass":
                        meta = MGParams.from_dict(header)
                    normalized = bool(header.get("normalized", False))
                    if "mu" in header and "std" in header:
                        stats = (header["mu"], header["std"])
                continue
            values.append(float(line))
    return TimeSeries(np.array(values), meta=meta, normalized=normalized, norm_stats=stats)
