"""Wall-clock comparison of the five variants at matched state size."""

from __future__ import annotations

import statistics
from dataclasses import asdict, dataclass, replace

from .. import kernels
from ..activation import ActivationKind
from ..mackey_glass import make_trajectories
from ..mapping import ChebyshevParams, LogisticParams
from ..models import VARIANTS, ESNConfig, RandomExpansion, TCRCConfig
from .experiment import ExperimentConfig, load_dataset, run_single

__all__ = ["TimingRow", "matched_config", "benchmark"]


@dataclass
class TimingRow:
    variant: str
    target_size: int
    state_dim: int
    backend: str
    repeats: int
    median_s: float

    def to_dict(self) -> dict:
        return asdict(self)


def matched_config(variant: str, size: int, activation=None, beta: float = 1e-6):
    """A config of ``variant`` whose readout dimension is close to ``size``."""
    act = activation or ActivationKind()
    if variant == "esn":
        return ESNConfig(n_res=size, activation=act, beta=beta)
    if variant == "tcrc":
        best = None
        for layers in (1, 2, 3):
            for dh in range(layers, size + 2):
                cfg = TCRCConfig(delta_hat=dh, layers=layers, activation=act, beta=beta)
                gap = abs(cfg.state_dim - size)
                if best is None or gap < best[0]:
                    best = (gap, cfg)
                if cfg.state_dim > size:
                    break
        return best[1]
    expansion = {
        "tcrc-elm": RandomExpansion(0.5, 0),
        "tcrc-cm": ChebyshevParams(0.5, 1.0, 2.0),
        "tcrc-lm": LogisticParams(3.9, 0.5, 1.5, 1),
    }[variant]
    best = None
    for dh in range(2, 41):
        for n in range(1, 21):
            cfg = TCRCConfig(delta_hat=dh, layers=2, activation=act, expansion=expansion,
                             n_expand=n, beta=beta)
            gap = abs(cfg.state_dim - size)
            if best is None or gap < best[0]:
                best = (gap, cfg)
    return best[1]


def benchmark(cfg: ExperimentConfig, repeats: int = 3, sizes=(300,), variants=VARIANTS,
              backends=None) -> list:
    """Median train+forecast wall time per variant and size.

    Uses the first tau and trajectory of ``cfg``. ``backends`` defaults to
    the active kernel backend only.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    backends = backends or (kernels.backend_name(),)
    act = cfg.model.activation
    rows = []
    for size in sizes:
        for variant in variants:
            model_cfg = matched_config(variant, int(size), act, cfg.model.beta)
            if model_cfg.is_random:
                model_cfg = model_cfg.with_seed(cfg.seeds[0] if cfg.seeds else 0)
            exp = replace(cfg, model=model_cfg, trajectories=1, samples=None)
            series = load_dataset(replace(cfg.mg, tau=cfg.taus[0]), exp.n_samples, exp.discard)
            traj = make_trajectories(series, 1, exp.s_t, exp.s_p, exp.effective_warmup)[0]
            for backend in backends:
                times = []
                with kernels.use_backend(backend):
                    for _ in range(repeats):
                        _, wall = run_single(model_cfg, traj.train.values, traj.test.values, exp.s_t)
                        times.append(wall)
                rows.append(TimingRow(variant, int(size), model_cfg.state_dim, backend, repeats,
                                      statistics.median(times)))
    return rows
