# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`tcrc._pykernels`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, sin, cos, exp, fabs, pow, isfinite

cnp.import_array()

BACKEND = "compiled"

# activation codes, see tcrc.activation.Kind.code
DEF TANH = 0
DEF SIN = 1
DEF SIGMOID = 2
DEF LOBACHEVSKY = 3
DEF IDENTITY = 4

# expansion kinds
DEF EXP_NONE = 0
DEF EXP_DENSE = 1
DEF EXP_CSR = 2


cdef inline double _act(double x, int code, int k_c) noexcept nogil:
    cdef double z, acc, th, c2, prev, cur, nxt, w
    cdef int i
    if code == TANH:
        return tanh(x)
    elif code == SIN:
        return sin(x)
    elif code == SIGMOID:
        z = exp(-fabs(x))
        if x >= 0:
            return 1.0 / (1.0 + z)
        return z / (1.0 + z)
    elif code == LOBACHEVSKY:
        # sum_i 2^-i sin(i th), th = 4x, via sin((i+1)th) = 2 cos(th) sin(i th) - sin((i-1)th)
        th = 4.0 * x
        c2 = 2.0 * cos(th)
        prev = 0.0
        cur = sin(th)
        w = 0.5
        acc = 0.0
        for i in range(1, k_c + 1):
            acc = acc + w * cur
            nxt = c2 * cur - prev
            prev = cur
            cur = nxt
            w = 0.5 * w
        return acc / 2.0
    return x


def activate(const double[::1] v, int code, int k_c):
    cdef Py_ssize_t i, n = v.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _act(v[i], code, k_c)
    return out


def mg_rk4(double beta, double theta, double gamma, double n_exp, double dt,
           Py_ssize_t delay_steps, Py_ssize_t stride, double history, Py_ssize_t n_emit):
    """Fixed-step RK4 for the Mackey-Glass delay equation.

    Returns ``(samples, n_ok)``; ``n_ok < n_emit`` flags a non-finite state.
    """
    out = np.empty(n_emit)
    cdef double[::1] o = out
    ring_arr = np.full(delay_steps + 1, history)
    cdef double[::1] ring = ring_arr
    cdef Py_ssize_t D = delay_steps + 1
    cdef Py_ssize_t head = delay_steps  # slot of the current state
    cdef Py_ssize_t k, j, n_ok = 0
    cdef double x = history, xd, prod, k1, k2, k3, k4
    cdef double theta_n = pow(theta, n_exp)
    with nogil:
        for k in range(n_emit):
            o[k] = x
            if not isfinite(x):
                break
            n_ok += 1
            if k == n_emit - 1:
                break
            for j in range(stride):
                xd = ring[(head + 1) % D]  # oldest slot = x(t - tau)
                prod = beta * theta * xd / (theta_n + pow(xd, n_exp))
                k1 = prod - gamma * x
                k2 = prod - gamma * (x + 0.5 * dt * k1)
                k3 = prod - gamma * (x + 0.5 * dt * k2)
                k4 = prod - gamma * (x + dt * k3)
                x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                head = (head + 1) % D
                ring[head] = x
    return out, n_ok


def csr_matvec(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
               const double[::1] data, const double[::1] v):
    cdef Py_ssize_t rows = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc
    out = np.empty(rows)
    cdef double[::1] o = out
    with nogil:
        for i in range(rows):
            acc = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                acc = acc + data[p] * v[indices[p]]
            o[i] = acc
    return out


cdef void _cascade(const double[::1] xhat, Py_ssize_t m, int layers, int code, int k_c,
                   double[::1] work, double[::1] s) noexcept nogil:
    # work holds the current layer in place; s receives the concatenation
    cdef Py_ssize_t i, pos = 0, width = m
    cdef int l
    for i in range(m):
        work[i] = xhat[i]
    for l in range(layers):
        for i in range(width - 1):
            work[i] = _act(work[i] * work[i + 1], code, k_c)
            s[pos + i] = work[i]
        pos += width - 1
        width -= 1


def tcrc_layers(const double[::1] xhat, int layers, int code, int k_c):
    cdef Py_ssize_t m = xhat.shape[0]
    cdef Py_ssize_t size = 0
    cdef int l
    for l in range(layers):
        size += m - 1 - l
    out = np.empty(size)
    work = np.empty(m)
    _cascade(xhat, m, layers, code, k_c, work, out)
    return out


def closed_loop_tcrc(const double[::1] history, int delta_hat, int layers, int code, int k_c,
                     int exp_kind, const double[:, ::1] w_dense,
                     const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                     const double[::1] data, const double[::1] w_x, const double[::1] w_s,
                     const double[::1] w_e, Py_ssize_t s_p):
    """Autonomous TCRC forecast.

    ``history`` is oldest-first; the last ``delta_hat + 1`` values seed the
    stack. ``w_x``/``w_s``/``w_e`` are the readout weights for the stacked
    input, the layer states and the expanded states (empty when unused).
    Returns ``(predictions, n_ok)``.
    """
    cdef Py_ssize_t m = delta_hat + 1
    cdef Py_ssize_t n_tc = 0, n_exp = 0
    cdef int l
    for l in range(layers):
        n_tc += m - 1 - l
    if exp_kind == EXP_DENSE:
        n_exp = w_dense.shape[0]
    elif exp_kind == EXP_CSR:
        n_exp = indptr.shape[0] - 1

    preds_arr = np.empty(s_p)
    cdef double[::1] preds = preds_arr
    ring_arr = np.empty(m)
    work_arr = np.empty(m)
    s_arr = np.empty(max(n_tc, 1))
    xhat_arr = np.empty(m)
    cdef double[::1] ring = ring_arr
    cdef double[::1] work = work_arr
    cdef double[::1] s = s_arr
    cdef double[::1] xhat = xhat_arr
    cdef Py_ssize_t h = history.shape[0]
    cdef Py_ssize_t i, j, p, step, head, n_ok = 0
    cdef double y, acc
    cdef bint use_x = w_x.shape[0] > 0
    cdef bint use_s = w_s.shape[0] > 0

    with nogil:
        for i in range(m):
            ring[i] = history[h - m + i]
        head = m - 1  # slot of the newest sample
        for step in range(s_p):
            for i in range(m):
                xhat[i] = ring[(head - i + m) % m]
            _cascade(xhat, m, layers, code, k_c, work, s)
            y = 0.0
            if use_x:
                for i in range(m):
                    y = y + w_x[i] * xhat[i]
            if use_s:
                for i in range(n_tc):
                    y = y + w_s[i] * s[i]
            if exp_kind == EXP_DENSE:
                for i in range(n_exp):
                    acc = 0.0
                    for j in range(n_tc):
                        acc = acc + w_dense[i, j] * s[j]
                    y = y + w_e[i] * _act(acc, code, k_c)
            elif exp_kind == EXP_CSR:
                for i in range(n_exp):
                    acc = 0.0
                    for p in range(indptr[i], indptr[i + 1]):
                        acc = acc + data[p] * s[indices[p]]
                    y = y + w_e[i] * _act(acc, code, k_c)
            preds[step] = y
            if not isfinite(y):
                break
            n_ok += 1
            head = (head + 1) % m
            ring[head] = y
    return preds_arr, n_ok
