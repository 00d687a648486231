"""Ridge readout, one-step prediction and closed-loop forecasting."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DivergenceError, NumericError, ParameterError, ShapeError
from .models import StateMatrix

__all__ = [
    "ReadoutWeights",
    "ForecastResult",
    "fit_tikhonov",
    "predict_step",
    "forecast_closed_loop",
    "mse",
]


@dataclass(frozen=True, eq=False)
class ReadoutWeights:
    w_out: np.ndarray  # (n_out, dim)
    beta: float

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.w_out, dtype=float))
        if not np.all(np.isfinite(w)):
            raise NumericError("readout weights are not finite")
        object.__setattr__(self, "w_out", w)

    @property
    def dim(self) -> int:
        return self.w_out.shape[1]

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "n_out": self.w_out.shape[0], "beta": self.beta,
                           "values": [float(x) for x in self.w_out.ravel()]})

    @classmethod
    def from_json(cls, text: str) -> "ReadoutWeights":
        d = json.loads(text)
        w = np.array(d["values"], dtype=float).reshape(d.get("n_out", 1), d["dim"])
        return cls(w, d["beta"])

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "ReadoutWeights":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class ForecastResult:
    predictions: np.ndarray
    targets: np.ndarray
    mse: float
    divergent: bool = False
    n_valid: int = -1


def fit_tikhonov(s, y, beta: float) -> ReadoutWeights:
    """Solve ``W = Y S^T (S S^T + beta I)^+``.

    ``s`` is a :class:`StateMatrix` or a ``(dim, steps)`` array; ``y`` is
    ``(n_out, steps)`` or 1-d of length ``steps``. A symmetric solve is used;
    the SVD-based pseudoinverse is the fallback when the Gram matrix is
    singular.
    """
    S = s.columns if isinstance(s, StateMatrix) else np.asarray(s, dtype=float)
    Y = np.atleast_2d(np.asarray(y, dtype=float))
    if S.ndim != 2 or S.shape[1] < 1:
        raise ShapeError("state matrix must be (dim, steps) with steps >= 1")
    if Y.shape[1] != S.shape[1]:
        raise ShapeError(f"{Y.shape[1]} targets for {S.shape[1]} state columns")
    if not beta >= 0:
        raise ParameterError(f"beta must be nonnegative, got {beta}")
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(Y))):
        raise NumericError("non-finite values in states or targets")
    dim = S.shape[0]
    gram = S @ S.T
    gram[np.diag_indices(dim)] += beta
    rhs = Y @ S.T
    w = None
    singular = beta == 0 and np.linalg.matrix_rank(gram) < dim
    if not singular:
        try:
            w = np.linalg.solve(gram, rhs.T).T
        except np.linalg.LinAlgError:
            w = None
    if w is None or not np.all(np.isfinite(w)):
        if beta == 0:
            w = Y @ np.linalg.pinv(S)
        else:
            w = rhs @ np.linalg.pinv(gram, hermitian=True)
    return ReadoutWeights(w, float(beta))


def predict_step(w: ReadoutWeights, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape[0] != w.dim:
        raise ShapeError(f"state of length {s.shape[0]} for readout of dim {w.dim}")
    return w.w_out @ s


def mse(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=float).reshape(-1)
    t = np.asarray(targets, dtype=float).reshape(-1)
    if p.size == 0 or p.size != t.size:
        raise ParameterError(f"need equal nonzero lengths, got {p.size} and {t.size}")
    return float(np.sum((p - t) ** 2) / p.size)


def forecast_closed_loop(model, w: ReadoutWeights, seed_history, s_p: int, targets=None) -> ForecastResult:
    """Feed predictions back as inputs for ``s_p`` steps.

    Ground-truth test values are only used to score. A non-finite prediction
    truncates the run: ``divergent`` is set and the missing tail is padded
    with the last finite prediction before scoring.
    """
    if s_p < 1:
        raise ParameterError("s_p must be >= 1")
    if w.dim != model.dim:
        raise ShapeError(f"readout dim {w.dim} does not match model dim {model.dim}")
    if w.w_out.shape[0] != 1:
        raise ShapeError("closed-loop forecasting needs a single output")
    preds, n_ok = model.forecast(seed_history, w.w_out[0], s_p)
    preds = np.array(preds, dtype=float)
    divergent = n_ok < s_p
    if divergent:
        fill = preds[n_ok - 1] if n_ok > 0 else 0.0
        preds[n_ok:] = fill
    if targets is None:
        tgt = np.full(s_p, np.nan)
        score = float("nan")
    else:
        tgt = np.asarray(targets, dtype=float).reshape(-1)
        if tgt.size != s_p:
            raise ShapeError(f"{tgt.size} targets for a {s_p}-step forecast")
        with np.errstate(over="ignore"):
            score = mse(preds, tgt)
    return ForecastResult(preds, tgt, score, divergent, int(n_ok))


def require_finite(result: ForecastResult) -> ForecastResult:
    if result.divergent:
        raise DivergenceError(f"forecast diverged after {result.n_valid} steps")
    return result
