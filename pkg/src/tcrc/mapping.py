"""Fixed (untrained) weight matrices.

Three constructions are provided:

* ``build_random_uniform``  - i.i.d. ``U(-sigma, sigma)`` entries (ESN, TCRC-ELM)
* ``build_chebyshev``       - dense Chebyshev map (TCRC-CM)
* ``build_logistic_sparse`` - block-sparse logistic map (TCRC-LM)

Matrices are described by a JSON-serializable *recipe*; :func:`from_recipe`
rebuilds the identical matrix, so raw weights never need to be stored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import DomainError, ParameterError, ShapeError, SpectralRadiusZeroError

__all__ = [
    "PRNG_NAME",
    "WeightMap",
    "ChebyshevParams",
    "LogisticParams",
    "build_random_uniform",
    "build_chebyshev",
    "build_logistic_sparse",
    "logistic_chain",
    "spectral_radius",
    "rescale_spectral_radius",
    "apply_map",
    "from_recipe",
]

# bump the suffix if the draw order in build_random_uniform ever changes
PRNG_NAME = "numpy-pcg64/v1"


@dataclass(frozen=True, eq=False)
class WeightMap:
    """Dense or sparse real matrix plus the recipe that produced it.

    Exactly one of ``dense`` or the COO triplet ``(sp_rows, sp_cols, sp_vals)``
    is set. Arrays are made read-only on construction.
    """

    rows: int
    cols: int
    dense: Optional[np.ndarray] = None
    sp_rows: Optional[np.ndarray] = None
    sp_cols: Optional[np.ndarray] = None
    sp_vals: Optional[np.ndarray] = None
    recipe: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ParameterError(f"map shape must be positive, got {self.rows}x{self.cols}")
        if (self.dense is None) == (self.sp_vals is None):
            raise ParameterError("exactly one of dense or sparse storage must be given")
        if self.dense is not None:
            d = np.ascontiguousarray(self.dense, dtype=float)
            if d.shape != (self.rows, self.cols):
                raise ShapeError(f"dense storage has shape {d.shape}, expected {(self.rows, self.cols)}")
            if not np.all(np.isfinite(d)):
                raise ParameterError("weight map contains non-finite values")
            d.setflags(write=False)
            object.__setattr__(self, "dense", d)
            return
        r = np.asarray(self.sp_rows, dtype=np.int64)
        c = np.asarray(self.sp_cols, dtype=np.int64)
        v = np.asarray(self.sp_vals, dtype=float)
        if not (r.shape == c.shape == v.shape) or r.ndim != 1:
            raise ShapeError("sparse triplets must be equal-length 1-d arrays")
        if r.size and (r.min() < 0 or r.max() >= self.rows or c.min() < 0 or c.max() >= self.cols):
            raise ParameterError("sparse index out of range")
        if not np.all(np.isfinite(v)):
            raise ParameterError("weight map contains non-finite values")
        order = np.lexsort((c, r))
        r, c, v = r[order], c[order], v[order]
        if r.size > 1 and np.any((np.diff(r) == 0) & (np.diff(c) == 0)):
            raise ParameterError("duplicate (row, col) entries in sparse map")
        indptr = np.zeros(self.rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=self.rows), out=indptr[1:])
        for name, arr in (("sp_rows", r), ("sp_cols", c), ("sp_vals", v), ("_indptr", indptr)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def is_sparse(self) -> bool:
        return self.dense is None

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(self.sp_vals.size) if self.is_sparse else int(np.count_nonzero(self.dense))

    def csr(self):
        """``(indptr, indices, data)`` of the sparse storage."""
        if not self.is_sparse:
            raise ParameterError("map is dense")
        return self._indptr, self.sp_cols, self.sp_vals

    def toarray(self) -> np.ndarray:
        if not self.is_sparse:
            return np.array(self.dense)
        out = np.zeros((self.rows, self.cols))
        out[self.sp_rows, self.sp_cols] = self.sp_vals
        return out

    def to_sparse(self) -> "WeightMap":
        """Same matrix in triplet storage (zero entries dropped)."""
        if self.is_sparse:
            return self
        r, c = np.nonzero(self.dense)
        return WeightMap(self.rows, self.cols, sp_rows=r, sp_cols=c,
                         sp_vals=self.dense[r, c], recipe=dict(self.recipe))

    def scaled(self, factor: float, **recipe_extra) -> "WeightMap":
        recipe = {**self.recipe, **recipe_extra}
        if self.is_sparse:
            return WeightMap(self.rows, self.cols, sp_rows=self.sp_rows, sp_cols=self.sp_cols,
                             sp_vals=self.sp_vals * factor, recipe=recipe)
        return WeightMap(self.rows, self.cols, dense=self.dense * factor, recipe=recipe)

    def recipe_json(self) -> str:
        return json.dumps(self.recipe, sort_keys=True)


@dataclass(frozen=True)
class ChebyshevParams:
    p: float = 0.5
    q: float = 1.0
    k_cheb: float = 2.0

    def __post_init__(self):
        if not (0 < abs(self.p) <= 1):
            raise ParameterError(f"Chebyshev p must satisfy 0 < |p| <= 1, got {self.p}")
        if self.q == 0 or not math.isfinite(self.q):
            raise ParameterError("Chebyshev q must be finite and nonzero")
        if not math.isfinite(self.k_cheb):
            raise ParameterError("Chebyshev k must be finite")


@dataclass(frozen=True)
class LogisticParams:
    r: float = 3.9
    a: float = 0.5
    b: float = 1.5
    n_expand: int = 2

    def __post_init__(self):
        if not (0 < self.r <= 4):
            raise ParameterError(f"logistic r must lie in (0, 4], got {self.r}")
        if self.b == 0 or not math.isfinite(self.b) or not math.isfinite(self.a):
            raise ParameterError("logistic a must be finite and b finite and nonzero")
        if int(self.n_expand) != self.n_expand or self.n_expand < 1:
            raise ParameterError(f"n_expand must be a positive integer, got {self.n_expand}")


def build_random_uniform(rows: int, cols: int, sigma: float, seed: int) -> WeightMap:
    """Dense map with i.i.d. ``U(-sigma, sigma)`` entries from a seeded PCG64."""
    if rows < 1 or cols < 1:
        raise ParameterError(f"map shape must be positive, got {rows}x{cols}")
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    rng = np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    w = rng.uniform(-sigma, sigma, size=(rows, cols))
    recipe = {"kind": "random_uniform", "rows": rows, "cols": cols, "sigma": sigma,
              "seed": int(seed), "prng": PRNG_NAME}
    return WeightMap(rows, cols, dense=w, recipe=recipe)


def build_chebyshev(rows: int, cols: int, params: ChebyshevParams) -> WeightMap:
    """Dense Chebyshev map.

    Row 0 is ``p * sin((i - 1) pi / (q (cols + 1)))`` for ``i = 0..cols-1``;
    every later row applies ``w -> cos(k arccos(w))`` to the row above.
    """
    if rows < 1 or cols < 1:
        raise ParameterError(f"map shape must be positive, got {rows}x{cols}")
    w = np.empty((rows, cols))
    i = np.arange(cols)
    w[0] = params.p * np.sin((i - 1) * np.pi / (params.q * (cols + 1)))
    for j in range(1, rows):
        prev = w[j - 1]
        if np.any(np.abs(prev) > 1):
            raise DomainError(f"row {j - 1} leaves the arccos domain [-1, 1]")
        w[j] = np.cos(params.k_cheb * np.arccos(prev))
    recipe = {"kind": "chebyshev", "rows": rows, "cols": cols,
              "p": params.p, "q": params.q, "k_cheb": params.k_cheb}
    return WeightMap(rows, cols, dense=w, recipe=recipe)


def logistic_chain(seed: float, r: float, length: int) -> np.ndarray:
    """``length`` iterates of ``w -> r w (1 - w)`` starting at ``seed``."""
    out = np.empty(length)
    w = float(seed)
    for j in range(length):
        out[j] = w
        w = r * w * (1.0 - w)
    return out


def build_logistic_sparse(rows: int, cols: int, params: LogisticParams) -> WeightMap:
    """Block-sparse logistic map with ``n_expand`` nonzeros per column.

    Column ``c`` occupies rows ``c*n .. (c+1)*n - 1``. Its values run down the
    logistic recurrence from the seed ``a * sin(i pi / ((rows - 1) b))``, where
    ``i = c*n`` is the global row of the block's first entry. Seeds must lie in
    ``[0, 1]`` so the chain stays there.
    """
    n = params.n_expand
    if cols < 1 or rows < 1:
        raise ParameterError(f"map shape must be positive, got {rows}x{cols}")
    if rows != n * cols:
        raise ParameterError(f"rows ({rows}) must equal n_expand*cols ({n}*{cols})")
    denom = (rows - 1) * params.b if rows > 1 else params.b
    first_rows = np.arange(cols) * n
    seeds = params.a * np.sin(first_rows * np.pi / denom)
    bad = (seeds < 0) | (seeds > 1)
    if np.any(bad):
        c = int(np.flatnonzero(bad)[0])
        raise ParameterError(f"logistic seed {seeds[c]:.6g} for column {c} is outside [0, 1]")
    vals = np.concatenate([logistic_chain(s, params.r, n) for s in seeds])
    sp_rows = np.arange(rows)
    sp_cols = np.repeat(np.arange(cols), n)
    recipe = {"kind": "logistic_sparse", "rows": rows, "cols": cols, "r": params.r,
              "a": params.a, "b": params.b, "n_expand": n}
    return WeightMap(rows, cols, sp_rows=sp_rows, sp_cols=sp_cols, sp_vals=vals, recipe=recipe)


def _as_operator(w):
    if isinstance(w, WeightMap):
        if w.is_sparse:
            indptr, idx, data = w.csr()
            return lambda x: _csr_matmat(indptr, idx, data, x, w.rows)
        return w.dense.__matmul__
    a = np.asarray(w, dtype=float)
    return a.__matmul__


def _csr_matmat(indptr, idx, data, x, rows):
    out = np.zeros((rows, x.shape[1]))
    row_of = np.repeat(np.arange(rows), np.diff(indptr))
    np.add.at(out, row_of, data[:, None] * x[idx])
    return out


def spectral_radius(w, tol: float = 1e-10, max_iter: int = 10_000, block: int = 6) -> float:
    """Largest eigenvalue magnitude by block power (subspace) iteration.

    A block of vectors with Rayleigh-Ritz extraction is used instead of a
    single vector so that complex-conjugate dominant pairs, common for
    random non-symmetric matrices, still converge.
    """
    n_rows, n_cols = (w.rows, w.cols) if isinstance(w, WeightMap) else np.shape(w)
    if n_rows != n_cols:
        raise ShapeError(f"spectral radius needs a square matrix, got {n_rows}x{n_cols}")
    apply = _as_operator(w)
    n = n_rows
    p = min(block, n)
    rng = np.random.Generator(np.random.PCG64(0))
    q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    prev = math.inf
    stable = 0
    radius = 0.0
    for _ in range(max_iter):
        z = apply(q)
        scale = np.linalg.norm(z)
        if scale == 0:
            radius = 0.0
            break
        h = q.T @ z
        radius = float(np.max(np.abs(np.linalg.eigvals(h))))
        q, _ = np.linalg.qr(z)
        if abs(radius - prev) <= tol * max(radius, 1e-300):
            stable += 1
            if stable >= 3 or p == n:
                break
        else:
            stable = 0
        prev = radius
    if not radius > 1e-14:
        raise SpectralRadiusZeroError("matrix has spectral radius zero")
    return radius


def rescale_spectral_radius(w: WeightMap, rho: float) -> WeightMap:
    """Scale a square map so its spectral radius equals ``rho``."""
    if not rho > 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    current = spectral_radius(w)
    return w.scaled(rho / current, rho=rho)


def apply_map(w: WeightMap, v) -> np.ndarray:
    """Matrix-vector product ``w @ v`` for dense or sparse storage."""
    v = np.ascontiguousarray(v, dtype=float)
    if v.ndim != 1 or v.size != w.cols:
        raise ShapeError(f"vector of length {v.size} does not match map with {w.cols} columns")
    if w.is_sparse:
        indptr, idx, data = w.csr()
        return kernels.csr_matvec(indptr, idx, data, v)
    return w.dense @ v


def from_recipe(recipe) -> WeightMap:
    """Rebuild a map from its recipe (dict or JSON string)."""
    if isinstance(recipe, str):
        recipe = json.loads(recipe)
    kind = recipe.get("kind")
    if kind == "random_uniform":
        if recipe.get("prng", PRNG_NAME) != PRNG_NAME:
            raise ParameterError(f"recipe uses PRNG {recipe['prng']!r}, this build has {PRNG_NAME!r}")
        w = build_random_uniform(recipe["rows"], recipe["cols"], recipe["sigma"], recipe["seed"])
    elif kind == "chebyshev":
        w = build_chebyshev(recipe["rows"], recipe["cols"],
                            ChebyshevParams(recipe["p"], recipe["q"], recipe["k_cheb"]))
    elif kind == "logistic_sparse":
        w = build_logistic_sparse(recipe["rows"], recipe["cols"],
                                  LogisticParams(recipe["r"], recipe["a"], recipe["b"], recipe["n_expand"]))
    else:
        raise ParameterError(f"unknown map kind {kind!r}")
    if "rho" in recipe:
        w = rescale_spectral_radius(w, recipe["rho"])
    return w
