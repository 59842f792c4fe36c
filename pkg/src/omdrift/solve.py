"""Least-squares solves for the expansion coefficients."""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .model import N_B

RTOL = 1e-10


def initial_ls(theta_train, zdd_train, rtol=RTOL):
    """Minimum-norm least-squares fit of ``zdd ~ theta @ b``.

    Singular values below ``rtol * s_max`` are discarded, so rank-deficient
    feature matrices still give a unique answer.
    """
    theta = np.asarray(theta_train, dtype=float)
    zdd = np.asarray(zdd_train, dtype=float)
    if theta.ndim != 2 or theta.shape[0] == 0:
        raise ValueError("initial_ls needs at least one row")
    if theta.shape[0] != zdd.shape[0]:
        raise ValueError(f"row mismatch: theta {theta.shape}, zdd {zdd.shape}")
    sol, *_ = np.linalg.lstsq(theta, zdd, rcond=rtol)
    return sol


class RidgeSystem:
    """Normal-equation pieces of one training set, reused across many updates.

    ``update`` minimises ``||zdd - theta_S u||^2 + k1 ||u - g_S||^2 + k2 ||u||^2``
    over the coefficients on the support ``S`` and pins the rest to zero.
    """

    def __init__(self, theta_train, zdd_train):
        self.theta = np.ascontiguousarray(theta_train, dtype=float)
        self.zdd = np.ascontiguousarray(zdd_train, dtype=float)
        if self.theta.shape[0] != self.zdd.shape[0]:
            raise ValueError(f"row mismatch: theta {self.theta.shape}, zdd {self.zdd.shape}")
        self.gram = self.theta.T @ self.theta
        self.rhs = self.theta.T @ self.zdd

    def update(self, gb, support, k1, k2):
        gb = np.asarray(gb, dtype=float)
        support = np.asarray(support, dtype=bool)
        if support.shape != (N_B,) or gb.shape != (N_B,):
            raise ValueError("gb and support need 38 entries")
        if k1 < 0 or k2 < 0:
            raise ValueError("ridge weights must be non-negative")
        b = np.zeros(N_B)
        if not support.any():
            return b
        idx = np.flatnonzero(support)
        lam = k1 + k2
        if lam > 0:
            m = self.gram[idx][:, idx]
            m.flat[:: idx.size + 1] += lam
            y = self.rhs[idx] + k1 * gb[idx]
            b[idx] = cho_solve(cho_factor(m, check_finite=False), y, check_finite=False)
        else:
            b[idx] = initial_ls(self.theta[:, idx], self.zdd)
        return b


def ridge_update(theta_train, zdd_train, gb, support, k1, k2):
    """One-shot form of :meth:`RidgeSystem.update`."""
    return RidgeSystem(theta_train, zdd_train).update(gb, support, k1, k2)


def stationarity_residual(theta_train, zdd_train, gb, support, k1, k2, b):
    """Infinity norm of the normal-equation residual on the support."""
    theta = np.asarray(theta_train, dtype=float)
    idx = np.flatnonzero(np.asarray(support, dtype=bool))
    ts = theta[:, idx]
    u = np.asarray(b)[idx]
    lhs = ts.T @ (ts @ u) + (k1 + k2) * u
    rhs = ts.T @ np.asarray(zdd_train) + k1 * np.asarray(gb)[idx]
    return float(np.max(np.abs(lhs - rhs), initial=0.0))
