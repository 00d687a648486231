"""Backend selection for the hot loops.

The compiled extension ``tcrc._ckernels`` is preferred; if it is missing (or
``TCRC_PURE_PYTHON=1`` is set) the NumPy fallback in ``tcrc._pykernels`` is
used. Call :func:`use_backend` to switch explicitly, e.g. for benchmarking.
"""

import contextlib
import logging
import os

from . import _pykernels

logger = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _pykernels if os.environ.get("TCRC_PURE_PYTHON") == "1" or _ckernels is None else _ckernels

EXP_NONE, EXP_DENSE, EXP_CSR = 0, 1, 2


def available():
    """Names of the importable backends."""
    return sorted(_BACKENDS)


def backend_name():
    return _active.BACKEND


def set_backend(name):
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    _active = _BACKENDS[name]
    logger.debug("kernel backend -> %s", name)


@contextlib.contextmanager
def use_backend(name):
    previous = _active.BACKEND
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def activate(v, code, k_c):
    return _active.activate(v, code, k_c)


def mg_rk4(*args):
    return _active.mg_rk4(*args)


def csr_matvec(indptr, indices, data, v):
    return _active.csr_matvec(indptr, indices, data, v)


def tcrc_layers(xhat, layers, code, k_c):
    return _active.tcrc_layers(xhat, layers, code, k_c)


def closed_loop_tcrc(*args):
    return _active.closed_loop_tcrc(*args)
