"""Regression system built from a sampled path: accelerations, features, split."""

import csv
from dataclasses import dataclass

import numpy as np

from .model import B_LABELS, N_B


class TooFewSamples(ValueError):
    pass


def second_diff(traj):
    """Second-order accurate estimate of z'' at every sample.

    Interior rows use the centred three-point stencil; the two end rows use
    the one-sided four-point stencil ``(2, -5, 4, -1) / dt^2``.
    """
    z = np.asarray(traj.z, dtype=float)
    if z.size < 4:
        raise TooFewSamples(f"need at least 4 samples (N >= 3), got {z.size}")
    inv = 1.0 / (traj.dt * traj.dt)
    out = np.empty_like(z)
    out[1:-1] = (z[2:] - 2.0 * z[1:-1] + z[:-2]) * inv
    out[0] = (2.0 * z[0] - 5.0 * z[1] + 4.0 * z[2] - z[3]) * inv
    out[-1] = (2.0 * z[-1] - 5.0 * z[-2] + 4.0 * z[-3] - z[-4]) * inv
    return out


def feature_matrix(z):
    """Rows of the 38 basis functions evaluated at each entry of ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty((z.size, N_B))
    out[:, :10] = z[:, None] ** np.arange(10)
    for j in range(1, 5):
        out[:, 8 + 2 * j] = np.sin(j * z)
        out[:, 9 + 2 * j] = np.cos(j * z)
    trig = out[:, 10:14]
    for k in range(1, 6):
        out[:, 18 + 4 * (k - 1): 22 + 4 * (k - 1)] = out[:, k, None] * trig
    return out


def feature_row(z):
    return feature_matrix([z])[0]


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    seed: int


def split_rows(n, frac_train=0.7, seed=0):
    """Seeded uniform shuffle, then the first ``round(frac_train * n)`` rows train."""
    if not 0 < frac_train < 1:
        raise ValueError("frac_train must lie in (0, 1)")
    n_train = int(np.floor(frac_train * n + 0.5))
    perm = np.random.default_rng(seed).permutation(n)
    return SplitIndices(train=np.sort(perm[:n_train]), test=np.sort(perm[n_train:]), seed=int(seed))


@dataclass(frozen=True)
class DesignSystem:
    theta: np.ndarray
    zdd: np.ndarray
    split: SplitIndices

    @property
    def theta_train(self):
        return self.theta[self.split.train]

    @property
    def zdd_train(self):
        return self.zdd[self.split.train]

    @property
    def theta_test(self):
        return self.theta[self.split.test]

    @property
    def zdd_test(self):
        return self.zdd[self.split.test]


def build_design(traj, frac_train=0.7, seed=0):
    zdd = second_diff(traj)
    theta = feature_matrix(traj.z)
    theta.setflags(write=False)
    zdd.setflags(write=False)
    return DesignSystem(theta=theta, zdd=zdd, split=split_rows(zdd.size, frac_train, seed))


def write_design_csv(design, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zdd", *B_LABELS, "split"])
        train = np.zeros(design.zdd.size, dtype=bool)
        train[design.split.train] = True
        for i in range(design.zdd.size):
            row = [repr(float(design.zdd[i]))] + [repr(float(v)) for v in design.theta[i]]
            w.writerow(row + ["train" if train[i] else "test"])
