import os
import subprocess
import sys

import numpy as np
import pytest

from tcrc import _pykernels, kernels
from tcrc.activation import Kind
from tcrc.mapping import LogisticParams, build_logistic_sparse, build_random_uniform

compiled = pytest.mark.skipif("compiled" not in kernels.available(), reason="extension not built")


def both(fn, *args):
    with kernels.use_backend("python"):
        a = getattr(kernels, fn)(*args)
    with kernels.use_backend("compiled"):
        b = getattr(kernels, fn)(*args)
    return a, b


def test_python_backend_always_present():
    assert "python" in kernels.available()


def test_use_backend_restores():
    before = kernels.backend_name()
    with kernels.use_backend("python"):
        assert kernels.backend_name() == "python"
    assert kernels.backend_name() == before


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_env_forces_fallback():
    env = dict(os.environ, TCRC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from tcrc import kernels; print(kernels.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@compiled
class TestEquivalence:
    @pytest.mark.parametrize("kind", list(Kind))
    @pytest.mark.parametrize("k_c", [1, 4, 12])
    def test_activate(self, kind, k_c, rng):
        v = rng.uniform(-20, 20, 5000)
        a, b = both("activate", v, kind.code, k_c)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("tau", [5, 17, 25])
    def test_mg(self, tau):
        args = (0.2, 1.0, 0.1, 10.0, 0.1, int(tau / 0.1), 10, 1.2, 3000)
        (a, na), (b, nb) = both("mg_rk4", *args)
        assert na == nb == 3000
        # identical arithmetic in both loops
        assert a.tobytes() == b.tobytes()

    def test_csr(self, rng):
        w = build_logistic_sparse(40, 10, LogisticParams(3.9, 0.6, 1.5, 4))
        v = rng.standard_normal(10)
        a, b = both("csr_matvec", *w.csr(), v)
        np.testing.assert_allclose(a, b, atol=1e-15)

    def test_layers(self, rng):
        x = rng.uniform(-2, 2, 12)
        a, b = both("tcrc_layers", x, 5, Kind.LOBACHEVSKY.code, 8)
        np.testing.assert_allclose(a, b, atol=1e-12)

    @pytest.mark.parametrize("exp", ["none", "dense", "csr"])
    def test_closed_loop(self, exp, rng):
        dh, layers = 7, 3
        n_tc = sum(dh - l for l in range(layers))
        empty_i = np.empty(0, dtype=np.int64)
        dense = np.empty((0, 0))
        indptr = idx = empty_i
        data = np.empty(0)
        kind, n_e = kernels.EXP_NONE, 0
        if exp == "dense":
            kind, n_e = kernels.EXP_DENSE, 2 * n_tc
            dense = build_random_uniform(n_e, n_tc, 0.5, 1).dense
        elif exp == "csr":
            kind, n_e = kernels.EXP_CSR, 2 * n_tc
            indptr, idx, data = build_logistic_sparse(n_e, n_tc, LogisticParams(3.9, 0.5, 1.5, 2)).csr()
        w_x = rng.standard_normal(dh + 1) * 0.1
        w_s = rng.standard_normal(n_tc) * 0.1
        w_e = rng.standard_normal(n_e) * 0.1
        hist = rng.uniform(-1, 1, 30)
        args = (hist, dh, layers, Kind.LOBACHEVSKY.code, 6, kind, dense, indptr, idx, data, w_x, w_s, w_e, 60)
        (a, na), (b, nb) = both("closed_loop_tcrc", *args)
        assert na == nb == 60
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)

    def test_read_only_inputs(self):
        v = np.linspace(-1, 1, 5)
        v.setflags(write=False)
        with kernels.use_backend("compiled"):
            kernels.activate(v, Kind.TANH.code, 8)


def test_fallback_module_api_matches():
    if "compiled" not in kernels.available():
        pytest.skip("extension not built")
    from tcrc import _ckernels
    for name in ("activate", "mg_rk4", "csr_matvec", "tcrc_layers", "closed_loop_tcrc"):
        assert callable(getattr(_ckernels, name)) and callable(getattr(_pykernels, name))
