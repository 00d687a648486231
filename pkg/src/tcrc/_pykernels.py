"""Pure-Python/NumPy versions of the compiled kernels in ``_ckernels.pyx``.

Used when the extension is not built or ``TCRC_PURE_PYTHON=1`` is set.
Results agree with the compiled path to rounding; they are not guaranteed
bit-identical across backends.
"""

import math

import numpy as np

from .activation import Kind, apply, ActivationKind

BACKEND = "python"

EXP_NONE, EXP_DENSE, EXP_CSR = 0, 1, 2

_BY_CODE = {k.code: k for k in Kind}


def _kind(code, k_c):
    return ActivationKind(_BY_CODE[code], k_c)


def activate(v, code, k_c):
    return apply(np.asarray(v, dtype=float), _kind(code, k_c))


def mg_rk4(beta, theta, gamma, n_exp, dt, delay_steps, stride, history, n_emit):
    out = np.empty(n_emit)
    D = delay_steps + 1
    ring = [float(history)] * D
    head = delay_steps
    x = float(history)
    theta_n = theta**n_exp
    n_ok = 0
    for k in range(n_emit):
        out[k] = x
        if not math.isfinite(x):
            break
        n_ok += 1
        if k == n_emit - 1:
            break
        for _ in range(stride):
            xd = ring[(head + 1) % D]
            try:
                prod = beta * theta * xd / (theta_n + xd**n_exp)
            except OverflowError:
                prod = math.nan
            k1 = prod - gamma * x
            k2 = prod - gamma * (x + 0.5 * dt * k1)
            k3 = prod - gamma * (x + 0.5 * dt * k2)
            k4 = prod - gamma * (x + dt * k3)
            x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            head = (head + 1) % D
            ring[head] = x
    return out, n_ok


def csr_matvec(indptr, indices, data, v):
    rows = len(indptr) - 1
    out = np.zeros(rows)
    counts = np.diff(indptr)
    row_of = np.repeat(np.arange(rows), counts)
    np.add.at(out, row_of, data * np.asarray(v)[indices])
    return out


def tcrc_layers(xhat, layers, code, k_c):
    kind = _kind(code, k_c)
    v = np.asarray(xhat, dtype=float)
    parts = []
    for _ in range(layers):
        v = apply(v[:-1] * v[1:], kind)
        parts.append(v)
    return np.concatenate(parts) if parts else np.empty(0)


def closed_loop_tcrc(history, delta_hat, layers, code, k_c, exp_kind, w_dense,
                     indptr, indices, data, w_x, w_s, w_e, s_p):
    kind = _kind(code, k_c)
    m = delta_hat + 1
    hist = list(np.asarray(history, dtype=float)[-m:])
    preds = np.empty(s_p)
    n_ok = 0
    with np.errstate(all="ignore"):
        for step in range(s_p):
            xhat = np.array(hist[::-1])
            s = tcrc_layers(xhat, layers, code, k_c)
            y = 0.0
            if len(w_x):
                y += float(w_x @ xhat)
            if len(w_s):
                y += float(w_s @ s)
            if exp_kind == EXP_DENSE:
                y += float(w_e @ apply(w_dense @ s, kind))
            elif exp_kind == EXP_CSR:
                y += float(w_e @ apply(csr_matvec(indptr, indices, data, s), kind))
            preds[step] = y
            if not math.isfinite(y):
                break
            n_ok += 1
            hist.pop(0)
            hist.append(y)
    return preds, n_ok
