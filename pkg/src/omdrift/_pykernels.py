"""Pure-Python versions of the hot numerical kernels.

These mirror ``_kernels.pyx`` function for function and are used when the
compiled extension is unavailable (or ``OMDRIFT_PURE_PYTHON=1`` is set).
"""

import math

import numpy as np

N_BETA = 10
N_B = 38
SENTINEL = 10.0

# rows of b that carry the x^k sin/cos cross terms, k = 1..5
_CROSS = 18


def drift_terms(beta, x):
    """Return (f, f', f'') of the basis expansion at ``x``."""
    p0, p1, p2, p3, p4, p5, s1, c1, s2, c2 = beta
    sx, cx = math.sin(x), math.cos(x)
    s2x, c2x = math.sin(2.0 * x), math.cos(2.0 * x)
    f = p0 + x * (p1 + x * (p2 + x * (p3 + x * (p4 + x * p5))))
    f += s1 * sx + c1 * cx + s2 * s2x + c2 * c2x
    df = p1 + x * (2.0 * p2 + x * (3.0 * p3 + x * (4.0 * p4 + x * 5.0 * p5)))
    df += s1 * cx - c1 * sx + 2.0 * s2 * c2x - 2.0 * c2 * s2x
    ddf = 2.0 * p2 + x * (6.0 * p3 + x * (12.0 * p4 + x * 20.0 * p5))
    ddf -= s1 * sx + c1 * cx + 4.0 * s2 * s2x + 4.0 * c2 * c2x
    return f, df, ddf


def el_rhs(beta, eps, z):
    f, df, ddf = drift_terms(beta, z)
    return 0.5 * eps * eps * ddf + df * f


def structure_map(beta, eps):
    p = [float(v) for v in beta[:6]]
    s1, c1, s2, c2 = (float(v) for v in beta[6:])
    e2 = float(eps) * float(eps)
    g = [0.0] * N_B

    # f_poly * f_poly'
    for i in range(6):
        if p[i] == 0.0:
            continue
        for k in range(1, 6):
            g[i + k - 1] += k * p[i] * p[k]
    # (eps^2 / 2) f_poly''
    for j in range(4):
        g[j] += 0.5 * e2 * (j + 2) * (j + 1) * p[j + 2]

    p0, p1 = p[0], p[1]
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
    return np.array(g)


def rk4_path(beta, eps, z0, v0, dt, n):
    """Integrate z'' = el_rhs(z) with classical RK4.

    Returns ``(z, bad)`` where ``bad`` is the first step index producing a
    non-finite state, or -1 when the whole path is finite.
    """
    beta = [float(v) for v in beta]
    eps = float(eps)
    out = np.empty(n + 1)
    z, v = float(z0), float(v0)
    out[0] = z
    half = 0.5 * dt
    sixth = dt / 6.0
    isfinite = math.isfinite
    for step in range(1, n + 1):
        try:
            a1 = el_rhs(beta, eps, z)
            z2 = z + half * v
            v2 = v + half * a1
            a2 = el_rhs(beta, eps, z2)
            z3 = z + half * v2
            v3 = v + half * a2
            a3 = el_rhs(beta, eps, z3)
            z4 = z + dt * v3
            v4 = v + dt * a3
            a4 = el_rhs(beta, eps, z4)
        except ValueError:  # sin/cos of an infinite argument
            out[step:] = np.nan
            return out, step
        z += sixth * (v + 2.0 * v2 + 2.0 * v3 + v4)
        v += sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        if not (isfinite(z) and isfinite(v)):
            out[step:] = np.nan
            return out, step
        out[step] = z
    return out, -1


def _quad(beta, j):
    """Coefficient of x^j in f_poly * f_poly' restricted to beta_1..beta_5."""
    total = 0.0
    for i in range(max(1, j - 4), min(5, j) + 1):
        k = j + 1 - i
        if 1 <= k <= 5:
            total += k * beta[i] * beta[k]
    return total


def _lstsq(rows, rhs):
    a = np.asarray(rows, dtype=float)
    sol, *_ = np.linalg.lstsq(a, np.asarray(rhs, dtype=float), rcond=None)
    return sol


def _solve_eps_beta0(rows_e2, rows_b0, rhs, beta0_free):
    """Least squares for (eps^2, beta_0); beta_0 is dropped when pinned."""
    if beta0_free:
        e2, b0 = _lstsq(np.column_stack([rows_e2, rows_b0]), rhs)
        return float(e2), float(b0)
    (e2,) = _lstsq(np.asarray(rows_e2, dtype=float)[:, None], rhs)
    return float(e2), 0.0


def _cross_trig(beta, b, free):
    """beta_6..beta_9 from the x^k sin/cos cross terms, given beta_1..beta_5."""
    p = beta
    rows, rhs = [], []
    for i in range(1, 6):
        up = (i + 1) * p[i + 1] if i < 5 else 0.0
        rows.append([up, -p[i], 0.0, 0.0])
        rows.append([p[i], up, 0.0, 0.0])
        rows.append([0.0, 0.0, up, -2.0 * p[i]])
        rows.append([0.0, 0.0, 2.0 * p[i], up])
        rhs.extend(b[_CROSS + 4 * (i - 1): _CROSS + 4 * i])
    cols = [c for c in range(4) if free[6 + c]]
    out = np.zeros(4)
    if cols:
        a = np.asarray(rows)[:, cols]
        out[cols] = _lstsq(a, rhs)
    return out


def _low_trig_system(beta):
    """Coefficients of (eps^2, beta_0) and the known part in b1s, b1c, b2s, b2c."""
    p1 = beta[1]
    s1, c1, s2, c2 = beta[6:10]
    rows_e2 = [-0.5 * s1, -0.5 * c1, -2.0 * s2, -2.0 * c2]
    rows_b0 = [-c1, s1, -2.0 * c2, 2.0 * s2]
    known = [
        p1 * s1 - 0.5 * (s1 * s2 + c1 * c2),
        p1 * c1 + 0.5 * (c1 * s2 - s1 * c2),
        p1 * s2 + 0.5 * (s1 * s1 - c1 * c1),
        p1 * c2 + s1 * c1,
    ]
    return rows_e2, rows_b0, known


def _trig_only(b, free):
    """beta_6..beta_9 when the polynomial part above the constant vanishes.

    Returns the four coefficients up to a common sign.
    """
    b4s, b4c = b[16], b[17]
    b3s, b3c = b[14], b[15]
    b2s, b2c = b[12], b[13]
    s1 = c1 = s2 = c2 = 0.0
    if b4c != 0 and free[8] and free[9]:
        c2 = math.sqrt(max(0.5 * (math.hypot(b4s, b4c) - b4s), 0.0))
        s2 = b4c / (2.0 * c2) if c2 != 0 else math.sqrt(max(b4s, 0.0))
    elif b4s > 0 and free[8]:
        s2 = math.sqrt(b4s)
    elif b4s < 0 and free[9]:
        c2 = math.sqrt(-b4s)

    if s2 != 0 or c2 != 0:
        # b3s = 1.5 (s1 s2 - c1 c2),  b3c = 1.5 (c1 s2 + s1 c2)
        r2 = s2 * s2 + c2 * c2
        s1 = (2.0 / 3.0) * (b3s * s2 + b3c * c2) / r2
        c1 = (2.0 / 3.0) * (b3c * s2 - b3s * c2) / r2
    else:
        # b2s = (s1^2 - c1^2) / 2,  b2c = s1 c1
        c1_sq = math.hypot(b2s, b2c) - b2s
        if b2c != 0 and free[6] and free[7] and c1_sq > 0:
            c1 = math.sqrt(c1_sq)
            s1 = b2c / c1
        elif b2s > 0 and free[6]:
            s1 = math.sqrt(2.0 * b2s)
        elif b2s < 0 and free[7]:
            c1 = math.sqrt(-2.0 * b2s)
    return np.array([s1, c1, s2, c2]) * free[6:10]


def cascade(b, free):
    """Top-down back-solve; returns ``(beta, eps, beta0_sentinel, eps_sentinel)``."""
    b = [float(v) for v in b]
    beta = [0.0] * N_BETA
    eps = SENTINEL
    beta0_sentinel = eps_sentinel = False

    head = 0
    for k in (5, 4, 3, 2, 1):
        if free[k]:
            v = math.sqrt(max(b[2 * k - 1], 0.0) / k)
            if v != 0:
                head = k
                beta[k] = v
                break

    if head >= 2:
        for m in range(head - 1, 0, -1):
            if free[m]:
                beta[m] = (b[head + m - 1] - _quad(beta, head + m - 1)) / ((head + m) * beta[head])
        rows_e2 = [0.5 * (j + 2) * (j + 1) * beta[j + 2] for j in range(head)]
        rows_b0 = [(j + 1) * beta[j + 1] for j in range(head)]
        rhs = [b[j] - _quad(beta, j) for j in range(head)]
        e2, beta0 = _solve_eps_beta0(rows_e2, rows_b0, rhs, free[0])
        beta[0] = beta0
        if e2 < 0:
            beta[:6] = [-v for v in beta[:6]]
        eps = math.sqrt(abs(e2))
        beta[6:] = _cross_trig(beta, b, free)
    elif head == 1:
        beta[0] = b[0] / beta[1] if free[0] else 0.0
        beta[6:] = _cross_trig(beta, b, free)
        eps_sentinel = True
        if any(beta[6:]):
            # eps only enters through the trigonometric part here
            rows_e2, rows_b0, known = _low_trig_system(beta)
            rhs = [b[10 + r] - known[r] - rows_b0[r] * beta[0] for r in range(4)]
            (e2,) = _lstsq(np.asarray(rows_e2)[:, None], rhs)
            if e2 < 0:
                beta = [-v for v in beta]
            eps = math.sqrt(abs(float(e2)))
            eps_sentinel = False
    else:
        beta[6:] = _trig_only(b, free)
        if any(beta[6:]):
            rows_e2, rows_b0, known = _low_trig_system(beta)
            rhs = [b[10 + r] - known[r] for r in range(4)]
            e2, beta0 = _solve_eps_beta0(rows_e2, rows_b0, rhs, free[0])
            if e2 < 0:
                beta[6:] = [-v for v in beta[6:]]
                beta0 = -beta0
            beta[0] = beta0
            eps = math.sqrt(abs(e2))
        else:
            eps_sentinel = True
            if free[0]:
                beta[0] = SENTINEL
                beta0_sentinel = True

    beta = np.array(beta, dtype=float)
    beta[~free] = 0.0
    return beta, float(eps), beta0_sentinel, eps_sentinel
