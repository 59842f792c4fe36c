"""Algebraic back-solve of drift coefficients and noise intensity from b.

The expansion coefficients are quadratic in the drift coefficients, so the
drift can be peeled off from the top: the highest nonzero power ``k`` of the
polynomial part satisfies ``b[2k-1] = k * beta_k^2``, the lower powers follow
by back substitution, and ``(eps^2, beta_0)`` solve a small overdetermined
linear system. The trigonometric part is then linear given the polynomial
part. Because ``G(beta, eps^2) == G(-beta, -eps^2)``, the sign of the whole
drift is fixed by requiring ``eps^2 >= 0``.

When a quantity cannot be determined (for example the noise intensity of a
purely linear drift, which never enters the path equation) it is set to
``SENTINEL`` and flagged.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from ._pykernels import SENTINEL
from .model import N_BETA, as_b, as_beta


@dataclass(frozen=True)
class RecoveredModel:
    beta: np.ndarray
    epsilon: float
    beta0_sentinel: bool = False
    epsilon_sentinel: bool = False

    @property
    def is_sentinel(self):
        return self.beta0_sentinel or self.epsilon_sentinel


def _cascade(b, free):
    beta, eps, b0_sentinel, eps_sentinel = kernels.cascade(b, np.asarray(free, dtype=bool))
    return RecoveredModel(beta=beta, epsilon=eps, beta0_sentinel=bool(b0_sentinel),
                          epsilon_sentinel=bool(eps_sentinel))


def findbeta1(b):
    """Recover (beta, eps) from expansion coefficients with every term allowed."""
    return _cascade(as_b(b), np.ones(N_BETA, dtype=bool))


def findbeta0(b, prior):
    """Like :func:`findbeta1`, but terms that are zero in ``prior`` stay zero."""
    free = np.asarray(prior, dtype=float).reshape(-1) != 0
    if free.size != N_BETA:
        raise ValueError(f"prior needs {N_BETA} entries")
    return _cascade(as_b(b), free)


def hard_threshold(beta, theta_t):
    """Zero every coefficient with ``|beta_i| < theta_t``."""
    beta = as_beta(beta)
    if theta_t < 0:
        raise ValueError("threshold must be non-negative")
    beta[np.abs(beta) < theta_t] = 0.0
    return beta
