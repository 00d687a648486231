"""Elementwise activation functions for reservoir states.

Besides the usual ``tanh``, ``sin`` and logistic sigmoid this module provides
a truncated Clausen series and the Lobachevsky-type activation built on it::

    clausen(s, k)     = sum_{i=0}^{k} 2**-i * sin(2 i s)
    lobachevsky(s, k) = clausen(2 s, k) / 2

The ``i = 0`` term is identically zero; it is kept so the sum reads the same
as its usual definition.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "Kind",
    "ActivationKind",
    "DEFAULT_KC",
    "clausen",
    "lobachevsky",
    "sigmoid",
    "apply",
    "parse_activation",
]

DEFAULT_KC = 8


class Kind(enum.Enum):
    TANH = "tanh"
    SIN = "sin"
    SIGMOID = "sigmoid"
    LOBACHEVSKY = "lobachevsky"
    # not a paper activation; handy for tracing the product cascade by hand
    IDENTITY = "identity"

    @property
    def code(self) -> int:
        return _CODES[self]


_CODES = {
    Kind.TANH: 0,
    Kind.SIN: 1,
    Kind.SIGMOID: 2,
    Kind.LOBACHEVSKY: 3,
    Kind.IDENTITY: 4,
}


@dataclass(frozen=True)
class ActivationKind:
    """Activation selector.

    ``k_c`` is the Clausen truncation order and only matters for
    :attr:`Kind.LOBACHEVSKY`.
    """

    kind: Kind = Kind.TANH
    k_c: int = DEFAULT_KC

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.k_c) != self.k_c or self.k_c < 1:
            raise ParameterError(f"k_c must be a positive integer, got {self.k_c!r}")
        object.__setattr__(self, "k_c", int(self.k_c))

    @property
    def name(self) -> str:
        return self.kind.value

    def __call__(self, v):
        return apply(v, self)

    def to_dict(self) -> dict:
        d = {"activation": self.kind.value}
        if self.kind is Kind.LOBACHEVSKY:
            d["k_c"] = self.k_c
        return d


def parse_activation(name: str | ActivationKind, k_c: int = DEFAULT_KC) -> ActivationKind:
    """Build an :class:`ActivationKind` from a config string."""
    if isinstance(name, ActivationKind):
        return name
    try:
        kind = Kind(str(name).lower())
    except ValueError:
        valid = ", ".join(k.value for k in Kind)
        raise ParameterError(f"unknown activation {name!r}; expected one of {valid}") from None
    return ActivationKind(kind, k_c)


def clausen(s, k_c: int):
    """Truncated Clausen series ``sum_{i=0}^{k_c} 2**-i sin(2 i s)``.

    Works on scalars and arrays alike.
    """
    if k_c < 1:
        raise ParameterError(f"k_c must be >= 1, got {k_c}")
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    for i in range(k_c + 1):
        out += np.sin(2.0 * i * s) / 2.0**i
    return out[()] if out.ndim == 0 else out


def lobachevsky(s, k_c: int = DEFAULT_KC):
    """Lobachevsky approximation ``clausen(2 s, k_c) / 2``.

    Odd, periodic with period pi/2, and bounded by ``(1 - 2**-k_c) / 2``.
    """
    return clausen(2.0 * np.asarray(s, dtype=float), k_c) / 2.0


def sigmoid(x):
    """Logistic function ``1 / (1 + exp(-x))`` without overflow warnings."""
    x = np.asarray(x, dtype=float)
    z = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return out[()] if out.ndim == 0 else out


def apply(v, kind: ActivationKind | str):
    """Apply ``kind`` elementwise; output has the shape of ``v``."""
    if not isinstance(kind, ActivationKind):
        kind = parse_activation(kind)
    v = np.asarray(v, dtype=float)
    k = kind.kind
    if k is Kind.TANH:
        return np.tanh(v)
    if k is Kind.SIN:
        return np.sin(v)
    if k is Kind.SIGMOID:
        return sigmoid(v)
    if k is Kind.LOBACHEVSKY:
        return lobachevsky(v, kind.k_c)
    return v.copy()
