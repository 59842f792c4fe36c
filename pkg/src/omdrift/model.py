"""Drift basis, Onsager-Machlup Lagrangian and the Euler-Lagrange expansion.

The drift is expanded as

    f(x) = beta0 + beta1 x + ... + beta5 x^5 + beta6 sin x + beta7 cos x
           + beta8 sin 2x + beta9 cos 2x

and the most probable path obeys ``z'' = (eps^2/2) f''(z) + f'(z) f(z)``.
Collecting terms of that right-hand side over a fixed 38-function basis gives
coefficients that are quadratic in the drift coefficients; ``structure_map``
computes them in closed form.
"""

import numpy as np

from . import kernels

N_BETA = 10
N_B = 38

BASIS_NAMES = ("1", "x", "x^2", "x^3", "x^4", "x^5", "sin x", "cos x", "sin 2x", "cos 2x")

_TRIG = ("s", "c")
B_LABELS = tuple(
    [f"b{j}" for j in range(10)]
    + [f"b{j}{t}" for j in range(1, 5) for t in _TRIG]
    + [f"b{m}{k}" for k in range(1, 6) for m in range(1, 5)]
)
B_INDEX = {label: i for i, label in enumerate(B_LABELS)}


def as_beta(beta):
    """Validate and copy a drift coefficient vector."""
    arr = np.array(beta, dtype=float).reshape(-1)
    if arr.shape != (N_BETA,):
        raise ValueError(f"drift coefficients need {N_BETA} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("drift coefficients must be finite")
    return arr


def as_b(b):
    arr = np.array(b, dtype=float).reshape(-1)
    if arr.shape != (N_B,):
        raise ValueError(f"expansion coefficients need {N_B} entries, got {arr.size}")
    return arr


def _check_eps(eps):
    eps = float(eps)
    if not np.isfinite(eps) or eps < 0:
        raise ValueError(f"diffusion coefficient must be finite and >= 0, got {eps}")
    return eps


def drift_eval(beta, x):
    """Evaluate the drift at ``x`` (scalar or array)."""
    beta = as_beta(beta)
    x = np.asarray(x, dtype=float)
    poly = np.polynomial.polynomial.polyval(x, beta[:6])
    trig = beta[6] * np.sin(x) + beta[7] * np.cos(x) + beta[8] * np.sin(2 * x) + beta[9] * np.cos(2 * x)
    out = poly + trig
    return float(out) if out.ndim == 0 else out


def drift_derivatives(beta, x):
    """Return ``(f, f', f'')`` at scalar ``x`` by term-wise differentiation."""
    return kernels.drift_terms(as_beta(beta), float(x))


def om_lagrangian(beta, eps, z, zdot):
    """Onsager-Machlup integrand ``((f(z) - zdot) / eps)^2 + f'(z)``."""
    eps = _check_eps(eps)
    if eps == 0:
        raise ZeroDivisionError("Onsager-Machlup Lagrangian is undefined for eps = 0")
    f, df, _ = drift_derivatives(beta, z)
    return ((f - zdot) / eps) ** 2 + df


def el_rhs(beta, eps, z):
    """Acceleration of the most probable path, ``(eps^2/2) f'' + f' f``."""
    return kernels.el_rhs(as_beta(beta), _check_eps(eps), float(z))


def structure_map(beta, eps):
    """Map drift coefficients and noise intensity to the 38 expansion coefficients.

    The ordering is ``b0..b9, b1s, b1c, b2s, b2c, b3s, b3c, b4s, b4c`` followed
    by ``b1k, b2k, b3k, b4k`` for ``k = 1..5`` (the ``x^k sin x``,
    ``x^k cos x``, ``x^k sin 2x`` and ``x^k cos 2x`` columns), matching
    :func:`omdrift.design.feature_row`.
    """
    return kernels.structure_map(as_beta(beta), _check_eps(eps))


def describe(beta, eps=None, tol=0.0):
    """Human-readable drift, e.g. ``0.5 x - 1.2 x^3 + 1 sin x``."""
    terms = []
    for coef, name in zip(as_beta(beta), BASIS_NAMES):
        if abs(coef) <= tol:
            continue
        sign = "-" if coef < 0 else "+"
        mag = f"{abs(coef):.6g}"
        body = mag if name == "1" else f"{mag} {name}"
        terms.append((sign, body))
    if not terms:
        text = "0"
    else:
        first_sign, first = terms[0]
        text = ("-" if first_sign == "-" else "") + first
        text += "".join(f" {s} {t}" for s, t in terms[1:])
    if eps is not None:
        text = f"f(x) = {text}, eps = {float(eps):.6g}"
    return text
