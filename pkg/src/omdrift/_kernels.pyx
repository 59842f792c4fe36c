# cython: language_level=3
"""Compiled versions of the hot numerical kernels (see ``_pykernels``)."""

import numpy as np

cimport cython
from libc.math cimport sin, cos, sqrt, fabs, fmax, hypot, isfinite, NAN

cdef int N_B = 38


cdef inline void _terms(double[10] p, double x, double* f, double* df, double* ddf) noexcept nogil:
    cdef double sx = sin(x), cx = cos(x), s2x = sin(2.0 * x), c2x = cos(2.0 * x)
    f[0] = p[0] + x * (p[1] + x * (p[2] + x * (p[3] + x * (p[4] + x * p[5]))))
    f[0] += p[6] * sx + p[7] * cx + p[8] * s2x + p[9] * c2x
    df[0] = p[1] + x * (2.0 * p[2] + x * (3.0 * p[3] + x * (4.0 * p[4] + x * 5.0 * p[5])))
    df[0] += p[6] * cx - p[7] * sx + 2.0 * p[8] * c2x - 2.0 * p[9] * s2x
    ddf[0] = 2.0 * p[2] + x * (6.0 * p[3] + x * (12.0 * p[4] + x * 20.0 * p[5]))
    ddf[0] -= p[6] * sx + p[7] * cx + 4.0 * p[8] * s2x + 4.0 * p[9] * c2x


cdef inline double _rhs(double[10] p, double half_e2, double z) noexcept nogil:
    cdef double f, df, ddf
    _terms(p, z, &f, &df, &ddf)
    return half_e2 * ddf + df * f


cdef void _load(beta, double[10] p) except *:
    if len(beta) != 10:
        raise ValueError("beta needs 10 entries")
    for i in range(10):
        p[i] = float(beta[i])


def drift_terms(beta, double x):
    """Return (f, f', f'') of the basis expansion at ``x``."""
    cdef double p[10]
    cdef double f, df, ddf
    _load(beta, p)
    _terms(p, x, &f, &df, &ddf)
    return f, df, ddf


def el_rhs(beta, double eps, double z):
    cdef double p[10]
    _load(beta, p)
    return _rhs(p, 0.5 * eps * eps, z)


@cython.boundscheck(False)
@cython.wraparound(False)
def structure_map(beta, double eps):
    cdef double p[10]
    cdef double e2 = eps * eps
    cdef double up
    cdef int i, k, j, col
    _load(beta, p)
    out = np.zeros(N_B)
    cdef double[::1] g = out

    for i in range(6):
        if p[i] == 0.0:
            continue
        for k in range(1, 6):
            g[i + k - 1] += k * p[i] * p[k]
    for j in range(4):
        g[j] += 0.5 * e2 * (j + 2) * (j + 1) * p[j + 2]

    cdef double p0 = p[0], p1 = p[1], s1 = p[6], c1 = p[7], s2 = p[8], c2 = p[9]
    g[10] = -0.5 * e2 * s1 - p0 * c1 + p1 * s1 - 0.5 * (s1 * s2 + c1 * c2)
    g[11] = -0.5 * e2 * c1 + p0 * s1 + p1 * c1 + 0.5 * (c1 * s2 - s1 * c2)
    g[12] = -2.0 * e2 * s2 - 2.0 * p0 * c2 + p1 * s2 + 0.5 * (s1 * s1 - c1 * c1)
    g[13] = -2.0 * e2 * c2 + 2.0 * p0 * s2 + p1 * c2 + s1 * c1
    g[14] = 1.5 * (s1 * s2 - c1 * c2)
    g[15] = 1.5 * (c1 * s2 + s1 * c2)
    g[16] = s2 * s2 - c2 * c2
    g[17] = 2.0 * s2 * c2

    for i in range(1, 6):
        up = (i + 1) * p[i + 1] if i < 5 else 0.0
        col = 18 + 4 * (i - 1)
        g[col] = up * s1 - p[i] * c1
        g[col + 1] = up * c1 + p[i] * s1
        g[col + 2] = up * s2 - 2.0 * p[i] * c2
        g[col + 3] = up * c2 + 2.0 * p[i] * s2
    return out


@cython.boundscheck(False)
@cython.wraparound(False)
def rk4_path(beta, double eps, double z0, double v0, double dt, Py_ssize_t n):
    """Integrate z'' = el_rhs(z) with classical RK4.

    Returns ``(z, bad)`` where ``bad`` is the first step index producing a
    non-finite state, or -1 when the whole path is finite.
    """
    cdef double p[10]
    _load(beta, p)
    out = np.empty(n + 1)
    cdef double[::1] o = out
    cdef double he2 = 0.5 * eps * eps, half = 0.5 * dt, sixth = dt / 6.0
    cdef double z = z0, v = v0, a1, a2, a3, a4, z2, z3, z4, v2, v3, v4
    cdef Py_ssize_t step, rest
    o[0] = z
    with nogil:
        for step in range(1, n + 1):
            a1 = _rhs(p, he2, z)
            z2 = z + half * v
            v2 = v + half * a1
            a2 = _rhs(p, he2, z2)
            z3 = z + half * v2
            v3 = v + half * a2
            a3 = _rhs(p, he2, z3)
            z4 = z + dt * v3
            v4 = v + dt * a3
            a4 = _rhs(p, he2, z4)
            z += sixth * (v + 2.0 * v2 + 2.0 * v3 + v4)
            v += sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            if not (isfinite(z) and isfinite(v)):
                for rest in range(step, n + 1):
                    o[rest] = NAN
                with gil:
                    return out, step
            o[step] = z
    return out, -1


# ---------------------------------------------------------------- back-solve

cdef double SENTINEL = 10.0


cdef double _quad(double* beta, int j) noexcept nogil:
    cdef double total = 0.0
    cdef int i, k
    for i in range(max(1, j - 4), min(5, j) + 1):
        k = j + 1 - i
        if 1 <= k <= 5:
            total += k * beta[i] * beta[k]
    return total


cdef void _lstsq2(double* a1, double* a2, double* y, int m, bint two,
                  double* x1, double* x2) noexcept nogil:
    # minimum-norm least squares on one or two columns (m <= 8 rows)
    cdef double n1 = 0.0, n2 = 0.0, d12 = 0.0, d1y = 0.0, d2y = 0.0, c, t
    cdef double q[8]
    cdef double nq = 0.0, dqy = 0.0
    cdef int i
    x1[0] = 0.0
    x2[0] = 0.0
    for i in range(m):
        n1 += a1[i] * a1[i]
        d1y += a1[i] * y[i]
    if not two:
        if n1 > 0.0:
            x1[0] = d1y / n1
        return
    for i in range(m):
        n2 += a2[i] * a2[i]
        d12 += a1[i] * a2[i]
        d2y += a2[i] * y[i]
    if n1 == 0.0:
        if n2 > 0.0:
            x2[0] = d2y / n2
        return
    c = d12 / n1
    for i in range(m):
        q[i] = a2[i] - c * a1[i]
        nq += q[i] * q[i]
        dqy += q[i] * y[i]
    if nq <= 1e-24 * n2:
        # a2 = c a1: spread t = <a1, y>/|a1|^2 over (1, c) with minimum norm
        t = d1y / n1
        x1[0] = t / (1.0 + c * c)
        x2[0] = c * t / (1.0 + c * c)
        return
    x2[0] = dqy / nq
    x1[0] = (d1y - d12 * x2[0]) / n1


cdef void _cross_trig(double* beta, double* b, bint* free) noexcept nogil:
    # beta6..beta9 from the x^k sin/cos cross terms; the four columns are orthogonal
    cdef double num[4]
    cdef double den[4]
    cdef double up, p, r0, r1, r2, r3
    cdef int i, c, row
    for c in range(4):
        num[c] = 0.0
        den[c] = 0.0
    for i in range(1, 6):
        up = (i + 1) * beta[i + 1] if i < 5 else 0.0
        p = beta[i]
        row = 18 + 4 * (i - 1)
        r0, r1, r2, r3 = b[row], b[row + 1], b[row + 2], b[row + 3]
        num[0] += up * r0 + p * r1
        den[0] += up * up + p * p
        num[1] += -p * r0 + up * r1
        den[1] += p * p + up * up
        num[2] += up * r2 + 2.0 * p * r3
        den[2] += up * up + 4.0 * p * p
        num[3] += -2.0 * p * r2 + up * r3
        den[3] += 4.0 * p * p + up * up
    for c in range(4):
        beta[6 + c] = num[c] / den[c] if (free[6 + c] and den[c] > 0.0) else 0.0


cdef void _low_trig(double* beta, double* re2, double* rb0, double* known) noexcept nogil:
    cdef double p1 = beta[1], s1 = beta[6], c1 = beta[7], s2 = beta[8], c2 = beta[9]
    re2[0] = -0.5 * s1
    re2[1] = -0.5 * c1
    re2[2] = -2.0 * s2
    re2[3] = -2.0 * c2
    rb0[0] = -c1
    rb0[1] = s1
    rb0[2] = -2.0 * c2
    rb0[3] = 2.0 * s2
    known[0] = p1 * s1 - 0.5 * (s1 * s2 + c1 * c2)
    known[1] = p1 * c1 + 0.5 * (c1 * s2 - s1 * c2)
    known[2] = p1 * s2 + 0.5 * (s1 * s1 - c1 * c1)
    known[3] = p1 * c2 + s1 * c1


cdef void _trig_only(double* b, bint* free, double* out) noexcept nogil:
    cdef double b4s = b[16], b4c = b[17], b3s = b[14], b3c = b[15], b2s = b[12], b2c = b[13]
    cdef double s1 = 0.0, c1 = 0.0, s2 = 0.0, c2 = 0.0, r2, c1_sq
    if b4c != 0.0 and free[8] and free[9]:
        c2 = sqrt(fmax(0.5 * (hypot(b4s, b4c) - b4s), 0.0))
        s2 = b4c / (2.0 * c2) if c2 != 0.0 else sqrt(fmax(b4s, 0.0))
    elif b4s > 0.0 and free[8]:
        s2 = sqrt(b4s)
    elif b4s < 0.0 and free[9]:
        c2 = sqrt(-b4s)
    if s2 != 0.0 or c2 != 0.0:
        r2 = s2 * s2 + c2 * c2
        s1 = (2.0 / 3.0) * (b3s * s2 + b3c * c2) / r2
        c1 = (2.0 / 3.0) * (b3c * s2 - b3s * c2) / r2
    else:
        c1_sq = hypot(b2s, b2c) - b2s
        if b2c != 0.0 and free[6] and free[7] and c1_sq > 0.0:
            c1 = sqrt(c1_sq)
            s1 = b2c / c1
        elif b2s > 0.0 and free[6]:
            s1 = sqrt(2.0 * b2s)
        elif b2s < 0.0 and free[7]:
            c1 = sqrt(-2.0 * b2s)
    out[0] = s1 if free[6] else 0.0
    out[1] = c1 if free[7] else 0.0
    out[2] = s2 if free[8] else 0.0
    out[3] = c2 if free[9] else 0.0


def cascade(b, free):
    """Top-down back-solve; returns ``(beta, eps, beta0_sentinel, eps_sentinel)``."""
    cdef double bb[38]
    cdef bint fr[10]
    cdef double beta[10]
    cdef double re2[8]
    cdef double rb0[8]
    cdef double rhs[8]
    cdef double known[4]
    cdef double eps = SENTINEL, e2 = 0.0, beta0 = 0.0, v
    cdef bint b0_sentinel = False, eps_sentinel = False, any_trig
    cdef int i, k, m, j, head = 0
    if len(b) != 38 or len(free) != 10:
        raise ValueError("cascade needs 38 coefficients and 10 flags")
    for i in range(38):
        bb[i] = float(b[i])
    for i in range(10):
        fr[i] = bool(free[i])
        beta[i] = 0.0

    for k in range(5, 0, -1):
        if fr[k]:
            v = sqrt(fmax(bb[2 * k - 1], 0.0) / k)
            if v != 0.0:
                head = k
                beta[k] = v
                break

    if head >= 2:
        for m in range(head - 1, 0, -1):
            if fr[m]:
                beta[m] = (bb[head + m - 1] - _quad(beta, head + m - 1)) / ((head + m) * beta[head])
        for j in range(head):
            re2[j] = 0.5 * (j + 2) * (j + 1) * beta[j + 2]
            rb0[j] = (j + 1) * beta[j + 1]
            rhs[j] = bb[j] - _quad(beta, j)
        _lstsq2(re2, rb0, rhs, head, fr[0], &e2, &beta0)
        beta[0] = beta0
        if e2 < 0.0:
            for i in range(6):
                beta[i] = -beta[i]
        eps = sqrt(fabs(e2))
        _cross_trig(beta, bb, fr)
    elif head == 1:
        beta[0] = bb[0] / beta[1] if fr[0] else 0.0
        _cross_trig(beta, bb, fr)
        eps_sentinel = True
        if beta[6] != 0.0 or beta[7] != 0.0 or beta[8] != 0.0 or beta[9] != 0.0:
            _low_trig(beta, re2, rb0, known)
            for j in range(4):
                rhs[j] = bb[10 + j] - known[j] - rb0[j] * beta[0]
            _lstsq2(re2, rb0, rhs, 4, False, &e2, &beta0)
            if e2 < 0.0:
                for i in range(10):
                    beta[i] = -beta[i]
            eps = sqrt(fabs(e2))
            eps_sentinel = False
    else:
        _trig_only(bb, fr, &beta[6])
        if beta[6] != 0.0 or beta[7] != 0.0 or beta[8] != 0.0 or beta[9] != 0.0:
            _low_trig(beta, re2, rb0, known)
            for j in range(4):
                rhs[j] = bb[10 + j] - known[j]
            _lstsq2(re2, rb0, rhs, 4, fr[0], &e2, &beta0)
            if e2 < 0.0:
                for i in range(6, 10):
                    beta[i] = -beta[i]
                beta0 = -beta0
            beta[0] = beta0
            eps = sqrt(fabs(e2))
        else:
            eps_sentinel = True
            if fr[0]:
                beta[0] = SENTINEL
                b0_sentinel = True

    out = np.empty(10)
    for i in range(10):
        out[i] = beta[i] if fr[i] else 0.0
    return out, eps, b0_sentinel, eps_sentinel
