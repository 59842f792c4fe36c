"""Most probable transition paths by shooting on the Euler-Lagrange BVP."""

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import _check_eps, as_beta


class DivergenceError(ArithmeticError):
    """The initial value integration produced a non-finite state."""

    def __init__(self, step, v0=None):
        self.step = step
        self.v0 = v0
        msg = f"integration diverged at step {step}"
        if v0 is not None:
            msg += f" (v0 = {v0!r})"
        super().__init__(msg)


class ShootingError(RuntimeError):
    pass


class BracketNotFound(ShootingError):
    pass


class NoConvergence(ShootingError):
    pass


def n_steps(T, dt):
    """Number of steps ``N = T / dt``; raises unless it is a positive integer."""
    T, dt = float(T), float(dt)
    if not (T > 0 and dt > 0):
        raise ValueError(f"T and dt must be positive, got T={T}, dt={dt}")
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"dt={dt} does not divide T={T} into an integer number of steps")
    return int(n)


@dataclass(frozen=True)
class Trajectory:
    """Uniform samples ``z[i] = z(i * dt)`` on ``[0, T]``."""

    T: float
    dt: float
    z: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        n = n_steps(self.T, self.dt)
        if z.shape != (n + 1,):
            raise ValueError(f"expected {n + 1} samples for T={self.T}, dt={self.dt}; got {z.shape}")
        if not np.all(np.isfinite(z)):
            raise ValueError("trajectory samples must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def N(self):
        return self.z.size - 1

    @property
    def t(self):
        return self.t0 + self.dt * np.arange(self.z.size)


@dataclass(frozen=True)
class BoundaryConditions:
    x0: float
    xT: float

    def __post_init__(self):
        if not (np.isfinite(self.x0) and np.isfinite(self.xT)):
            raise ValueError("boundary values must be finite")


def _path(beta, eps, z0, v0, dt, n):
    z, bad = kernels.rk4_path(beta, eps, float(z0), float(v0), float(dt), n)
    if bad >= 0:
        raise DivergenceError(bad, v0)
    return z


def integrate_ivp(beta, eps, z0, v0, dt, T):
    """RK4 solution of ``z'' = el_rhs(z)`` from ``z(0) = z0, z'(0) = v0``."""
    beta = as_beta(beta)
    eps = _check_eps(eps)
    n = n_steps(T, dt)
    return Trajectory(T=float(T), dt=float(dt), z=_path(beta, eps, z0, v0, dt, n))


def shoot(beta, eps, bc, T=1.0, dt=1e-3, tol=1e-10, *, scan_points=64, scan_scale=10.0, max_iter=100):
    """Solve the two-point problem ``z(0) = bc.x0, z(T) = bc.xT`` by shooting.

    The initial slope is scanned over ``[-V, V]`` with ``V = scan_scale *
    |xT - x0| / T`` in ``scan_points`` equal steps. Among the brackets with a
    sign change of ``z(T; v0) - xT`` the one closest to ``v0 = 0`` is refined
    by a secant iteration safeguarded by bisection.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    beta = as_beta(beta)
    eps = _check_eps(eps)
    n = n_steps(T, dt)
    x0, xT = float(bc.x0), float(bc.xT)

    def residual(v0):
        try:
            z = _path(beta, eps, x0, v0, dt, n)
        except DivergenceError:
            return np.nan, None
        return z[-1] - xT, z

    span = abs(xT - x0)
    vmax = scan_scale * (span if span > 0 else 1.0) / T
    grid = np.linspace(-vmax, vmax, scan_points + 1)
    scan = [residual(v) for v in grid]
    res = np.array([r for r, _ in scan])

    for i in np.argsort(np.abs(grid), kind="stable"):
        if res[i] == 0.0:
            return Trajectory(T=float(T), dt=float(dt), z=scan[i][1])

    brackets = [
        i for i in range(scan_points)
        if np.isfinite(res[i]) and np.isfinite(res[i + 1]) and np.sign(res[i]) != np.sign(res[i + 1])
    ]
    if not brackets:
        raise BracketNotFound(f"no sign change of the boundary residual for v0 in [{-vmax:.6g}, {vmax:.6g}]")
    i = min(brackets, key=lambda j: abs(0.5 * (grid[j] + grid[j + 1])))

    lo, hi = grid[i], grid[i + 1]
    r_lo, r_hi = res[i], res[i + 1]
    # secant iterates, kept inside [lo, hi]
    a, ra, b_, rb = lo, r_lo, hi, r_hi
    for _ in range(max_iter):
        v = b_ - rb * (b_ - a) / (rb - ra) if rb != ra else 0.5 * (lo + hi)
        if not (min(lo, hi) < v < max(lo, hi)):
            v = 0.5 * (lo + hi)
        r, z = residual(v)
        if z is None:
            v = 0.5 * (lo + hi)
            r, z = residual(v)
            if z is None:
                raise DivergenceError(-1, v)
        if abs(r) <= tol:
            return Trajectory(T=float(T), dt=float(dt), z=z)
        if np.sign(r) == np.sign(r_lo):
            lo, r_lo = v, r
        else:
            hi, r_hi = v, r
        a, ra, b_, rb = b_, rb, v, r
    raise NoConvergence(f"shooting did not reach tol={tol} in {max_iter} iterations")


def write_trajectory_csv(traj, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "z"])
        for t, z in zip(traj.t, traj.z):
            w.writerow([repr(float(t)), repr(float(z))])


def read_trajectory_csv(path):
    """Read a ``t,z`` CSV; the time grid must be uniform and start at 0."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "z"]:
        raise ValueError(f"{path}: expected header 't,z'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least two samples")
    t, z = data[:, 0], data[:, 1]
    dt = (t[-1] - t[0]) / (t.size - 1)
    if t[0] != 0.0 or not np.allclose(np.diff(t), dt, rtol=1e-6, atol=0):
        raise ValueError(f"{path}: samples must be uniform in t starting at 0")
    return Trajectory(T=float(t[-1]), dt=float(dt), z=z)
