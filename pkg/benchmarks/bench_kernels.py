"""Compare the compiled and pure-Python kernel backends.

Times each hot kernel on fixed inputs and then one end-to-end TCRC-LM
train+forecast run per backend. Usage::

    python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import statistics
import timeit

import numpy as np

from tcrc import kernels
from tcrc.activation import ActivationKind, Kind
from tcrc.harness import ExperimentConfig
from tcrc.harness.bench import benchmark
from tcrc.mapping import LogisticParams, build_logistic_sparse
from tcrc.models import TCRCConfig


def kernel_cases():
    rng = np.random.default_rng(0)
    lob = Kind.LOBACHEVSKY.code
    v = rng.standard_normal(100_000)
    xhat = rng.standard_normal(21)
    indptr, idx, data = (np.ascontiguousarray(a) for a in
                         build_logistic_sparse(8 * 39, 39, LogisticParams(3.9, 0.5, 1.5, 8)).csr())
    s = rng.standard_normal(39)
    hist = rng.standard_normal(100)
    w_x, w_s, w_e = (rng.standard_normal(n) * 1e-3 for n in (21, 39, 8 * 39))
    empty2 = np.empty((0, 0))
    return {
        "activate lobachevsky (1e5)": lambda: kernels.activate(v, lob, 8),
        "mg_rk4 tau=17 (2000 samples)": lambda: kernels.mg_rk4(0.2, 1.0, 0.1, 10.0, 0.1, 170, 10, 1.2, 2000),
        "csr_matvec (312x39)": lambda: kernels.csr_matvec(indptr, idx, data, s),
        "tcrc_layers (m=21, L=2)": lambda: kernels.tcrc_layers(xhat, 2, lob, 8),
        "closed_loop_tcrc (286 steps)": lambda: kernels.closed_loop_tcrc(
            hist, 20, 2, lob, 8, kernels.EXP_CSR, empty2, indptr, idx, data, w_x, w_s, w_e, 286),
    }


def time_case(fn, repeats):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeats)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available()
    print(f"backends: {', '.join(backends)}")
    cases = kernel_cases()
    results = {}
    for name in backends:
        with kernels.use_backend(name):
            results[name] = {case: time_case(fn, args.repeats) for case, fn in cases.items()}
    width = max(map(len, cases))
    print(f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in backends) + "  speedup")
    for case in cases:
        times = [results[b][case] for b in backends]
        ratio = results["python"][case] / results["compiled"][case] if len(backends) == 2 else 1.0
        print(f"{case:<{width}}  " + "  ".join(f"{t * 1e3:10.3f}ms" for t in times) + f"  {ratio:6.1f}x")

    act = ActivationKind(Kind.LOBACHEVSKY, 8)
    cfg = ExperimentConfig(model=TCRCConfig(activation=act), taus=(17,))
    rows = benchmark(cfg, repeats=args.repeats, sizes=(300,), variants=("tcrc-lm",), backends=backends)
    print("\nend-to-end TCRC-LM train+forecast, state size ~300")
    for r in rows:
        print(f"  {r.backend:>8}: {r.median_s * 1e3:9.2f}ms (state_dim {r.state_dim})")
    if len(rows) == 2:
        by = {r.backend: r.median_s for r in rows}
        print(f"  speedup: {by['python'] / by['compiled']:.1f}x")


if __name__ == "__main__":
    main()
