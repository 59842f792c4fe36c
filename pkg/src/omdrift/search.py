"""Alternating sparse regression, threshold search and the weight grid."""

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .model import B_LABELS, N_B, N_BETA
from .recover import RecoveredModel, findbeta0, findbeta1, hard_threshold
from .solve import RidgeSystem, initial_ls

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HyperParams:
    theta_t0: float = 0.05
    h0: float = 0.05
    eps1: float = 1e-6
    eps2: float = 1e-4
    inner_cap: int = 50
    outer_cap: int = 30

    def __post_init__(self):
        if self.theta_t0 < 0 or self.h0 <= 0 or self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("threshold settings must be positive (theta_t0 may be 0)")
        if self.inner_cap < 1 or self.outer_cap < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass(frozen=True)
class ErrorBundle:
    E1: float
    E2: float
    E3: float
    E4: int
    E5: int
    E6: float

    def with_weights(self, k1, k2):
        return replace(self, E6=self.E1 + k1 * self.E2 + k2 * self.E5)


@dataclass(frozen=True)
class CandidateRecord:
    beta: np.ndarray
    epsilon: float
    b: np.ndarray
    errors: ErrorBundle
    theta_t: float
    k1: float
    k2: float
    sentinel: bool = False
    iterations: int = 0

    @property
    def support(self):
        return tuple(int(i) for i in np.flatnonzero(self.beta))


@dataclass
class Problem:
    """Training normal equations plus the held-out rows of one design."""

    ridge: RidgeSystem
    theta_test: np.ndarray
    zdd_test: np.ndarray

    @classmethod
    def from_design(cls, design):
        return cls(
            ridge=RidgeSystem(design.theta_train, design.zdd_train),
            theta_test=np.ascontiguousarray(design.theta_test),
            zdd_test=np.ascontiguousarray(design.zdd_test),
        )


def _problem(obj):
    return obj if isinstance(obj, Problem) else Problem.from_design(obj)


def error_bundle(b, beta, epsilon, theta_test, zdd_test, k1, k2):
    """Test errors of one fitted model.

    E1 and E3 are squared residuals of ``b`` and of ``G(beta, eps)`` on the
    test rows, E2 the squared mismatch ``b - G``, E4/E5 the nonzero counts of
    beta and b, and ``E6 = E1 + k1 E2 + k2 E5``.
    """
    b = np.asarray(b, dtype=float)
    beta = np.asarray(beta, dtype=float)
    theta_test = np.asarray(theta_test, dtype=float)
    zdd_test = np.asarray(zdd_test, dtype=float)
    if b.shape != (N_B,) or beta.shape != (N_BETA,):
        raise ValueError("b needs 38 and beta 10 entries")
    if theta_test.ndim != 2 or theta_test.shape != (zdd_test.size, N_B):
        raise ValueError(f"test design {theta_test.shape} does not match {zdd_test.size} targets")
    g = kernels.structure_map(beta, float(epsilon))
    r1 = theta_test @ b - zdd_test
    r3 = theta_test @ g - zdd_test
    e1 = float(r1 @ r1)
    d = b - g
    e2 = float(d @ d)
    e3 = float(r3 @ r3)
    e5 = int(np.count_nonzero(b))
    return ErrorBundle(E1=e1, E2=e2, E3=e3, E4=int(np.count_nonzero(beta)), E5=e5,
                       E6=e1 + k1 * e2 + k2 * e5)


def _record(problem, b, model, theta_t, k1, k2, iterations=0):
    errs = error_bundle(b, model.beta, model.epsilon, problem.theta_test, problem.zdd_test, k1, k2)
    return CandidateRecord(beta=model.beta, epsilon=model.epsilon, b=np.asarray(b), errors=errs,
                           theta_t=float(theta_t), k1=float(k1), k2=float(k2),
                           sentinel=model.is_sentinel, iterations=iterations)


def initial_estimate(design):
    """Unregularised fit of b on the training rows and its back-solve."""
    problem = _problem(design)
    b = initial_ls(problem.ridge.theta, problem.ridge.zdd)
    return _record(problem, b, findbeta1(b), 0.0, 0.0, 0.0)


def inner_fixed_point(design, start, k1, k2, theta_t, eps1=1e-6, cap=50, trace=None):
    """Alternate ridge updates of b with thresholded back-solves of (beta, eps).

    ``start`` is ``(b, beta, eps)`` or a :class:`CandidateRecord`. Stops when
    the L1 change of beta drops below ``eps1`` or after ``cap`` rounds.
    Returns ``(b, RecoveredModel, iterations)``. If ``trace`` is a list, one
    :class:`CandidateRecord` per round is appended to it.
    """
    problem = _problem(design)
    if isinstance(start, CandidateRecord):
        b, beta, eps = start.b, start.beta, start.epsilon
    else:
        b, beta, eps = start
    model = RecoveredModel(beta=np.asarray(beta, dtype=float), epsilon=float(eps))
    gb = kernels.structure_map(model.beta, model.epsilon)
    prev = model.beta
    b = np.asarray(b, dtype=float)
    it = 0
    for it in range(1, cap + 1):
        b = problem.ridge.update(gb, gb != 0, k1, k2)
        rough = findbeta1(b)
        pins = hard_threshold(rough.beta, theta_t)
        model = findbeta0(b, pins)
        gb = kernels.structure_map(model.beta, model.epsilon)
        if trace is not None:
            trace.append(_record(problem, b, model, theta_t, k1, k2, it))
        if np.abs(model.beta - prev).sum() < eps1:
            break
        prev = model.beta
    return b, model, it


def threshold_search(design, init, k1, k2, hp=HyperParams(), inner_traces=None):
    """Adaptive search over the hard threshold for one weight pair.

    Every round restarts the alternation from ``init``. A round whose E6 beats
    the best so far is appended to the best list and the threshold grows by
    ``h``; otherwise the threshold steps back by ``2h``, ``h`` halves and the
    threshold advances by the new ``h``. Stops after ``hp.outer_cap`` rounds
    or once ``h < hp.eps2``.

    Returns ``(best_list, trace)``; the best list starts with ``init``.
    """
    problem = _problem(design)
    best = replace(init, errors=init.errors.with_weights(k1, k2), k1=float(k1), k2=float(k2), theta_t=0.0)
    ebest = [best]
    trace = []
    theta_t, h = hp.theta_t0, hp.h0
    for _ in range(hp.outer_cap):
        inner = [] if inner_traces is not None else None
        b, model, its = inner_fixed_point(problem, init, k1, k2, theta_t, hp.eps1, hp.inner_cap, inner)
        rec = _record(problem, b, model, theta_t, k1, k2, its)
        trace.append(rec)
        if inner_traces is not None:
            inner_traces.append(inner)
        if rec.errors.E6 < best.errors.E6:
            best = rec
            ebest.append(rec)
            theta_t += h
        else:
            theta_t = max(0.0, theta_t - 2.0 * h)
            h /= 2.0
            theta_t += h
        if h < hp.eps2:
            break
    return ebest, trace


def select_for_cell(ebest):
    """The best-list entry with the smallest E3 (earliest on ties)."""
    if not ebest:
        raise ValueError("empty best list")
    e3 = [r.errors.E3 for r in ebest]
    return ebest[int(np.argmin(e3))]


def _sentinel_record(k1, k2, template=None):
    if template is not None:
        errs = replace(template.errors, E3=math.inf)
        return replace(template, errors=errs, sentinel=True)
    errs = ErrorBundle(E1=math.inf, E2=math.inf, E3=math.inf, E4=0, E5=0, E6=math.inf)
    return CandidateRecord(beta=np.zeros(N_BETA), epsilon=math.nan, b=np.zeros(N_B), errors=errs,
                           theta_t=math.nan, k1=float(k1), k2=float(k2), sentinel=True)


def run_cell(problem, init, k1, k2, hp=HyperParams()):
    """Threshold search and selection for one (k1, k2) cell; never raises."""
    try:
        ebest, _ = threshold_search(problem, init, k1, k2, hp)
        rec = select_for_cell(ebest)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        log.warning("cell (%g, %g) failed: %s", k1, k2, exc)
        return _sentinel_record(k1, k2)
    if rec.sentinel:
        return _sentinel_record(k1, k2, rec)
    return rec


def _run_cells(args):
    problem, init, cells, hp = args
    return [run_cell(problem, init, k1, k2, hp) for k1, k2 in cells]


def grid_search(design, grid, hp=HyperParams(), jobs=1, init=None):
    """One selected record per (k1, k2) cell, in grid order."""
    grid = [(float(k1), float(k2)) for k1, k2 in grid]
    if not grid:
        raise ValueError("empty grid")
    problem = _problem(design)
    if init is None:
        init = initial_estimate(problem)
    if jobs <= 1 or len(grid) == 1:
        return _run_cells((problem, init, grid, hp))
    chunks = [grid[i::jobs] for i in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_run_cells, [(problem, init, c, hp) for c in chunks]))
    out = [None] * len(grid)
    for i, part in enumerate(parts):
        out[i::jobs] = part
    return out


def weight_grid(k1=(0.0, 0.025, 0.4), k2=(0.01, 0.01, 0.3)):
    """Cartesian weight grid from inclusive ``(start, step, stop)`` ranges."""
    return [(a, c) for a in _frange(*k1) for c in _frange(*k2)]


def _frange(start, step, stop):
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9))
    if n < 0:
        raise ValueError(f"empty range {start}:{step}:{stop}")
    return [round(start + i * step, 12) for i in range(n + 1)]


class NoRecordBelowCap(LookupError):
    pass


@dataclass
class SupportGroup:
    key: tuple
    records: list = field(default_factory=list)

    def concentrated(self, rel_spread):
        if len(self.records) < 2:
            return False
        betas = np.array([r.beta for r in self.records])
        eps = np.array([r.epsilon for r in self.records])
        cols = [betas[:, i] for i in self.key[0]] + [eps]
        for col in cols:
            mean = abs(col.mean())
            if mean == 0 or col.std(ddof=1) >= rel_spread * mean:
                return False
        return True


def select_final(table, e3_cap=1.0, rel_spread=0.05):
    """Pick the final model from the per-cell records.

    Records with ``E3 < e3_cap`` (sentinels excluded) are grouped by their
    support pattern. A group is concentrated when it has two or more records
    and every active coefficient and eps has sample standard deviation below
    ``rel_spread`` times its mean magnitude. The record with the smallest
    ``E1 + E3`` among the concentrated groups is returned; when no group is
    concentrated, the largest group is used instead (ties go to the group
    with the smaller best ``E1 + E3``).
    """
    groups = support_groups(table, e3_cap)
    converged = [r for g in groups if g.concentrated(rel_spread) for r in g.records]
    if converged:
        return min(converged, key=_e13)
    winner = min(groups, key=lambda g: (-len(g.records), min(map(_e13, g.records))))
    return min(winner.records, key=_e13)


def _e13(rec):
    return rec.errors.E1 + rec.errors.E3


def support_groups(table, e3_cap=1.0):
    """Sub-cap, non-sentinel records grouped by ``(beta support, E5)``."""
    if not table:
        raise ValueError("empty table")
    kept = [r for r in table if not r.sentinel and r.errors.E3 < e3_cap]
    if not kept:
        raise NoRecordBelowCap(f"no record with E3 < {e3_cap}")
    groups = {}
    for r in kept:
        key = (r.support, r.errors.E5)
        groups.setdefault(key, SupportGroup(key)).records.append(r)
    return list(groups.values())


def trace_cell(design, init, k1, k2, hp=HyperParams()):
    """Data behind the per-cell error plots.

    Returns ``(rounds, accepted, inner)``: one record per threshold round,
    whether that round entered the best list, and the inner iterations of the
    round finally selected for the cell (empty when the initial estimate wins).
    """
    problem = _problem(design)
    inner_traces = []
    ebest, rounds = threshold_search(problem, init, k1, k2, hp, inner_traces)
    chosen = select_for_cell(ebest)
    accepted = [any(r is e for e in ebest) for r in rounds]
    inner = next((tr for r, tr in zip(rounds, inner_traces) if r is chosen), [])
    return rounds, accepted, inner


RECORD_COLUMNS = (
    ["k1", "k2", "theta_t", "E1", "E2", "E3", "E4", "E5", "E6"]
    + [f"beta{i}" for i in range(N_BETA)]
    + ["epsilon", "sentinel"]
    + list(B_LABELS)
)


def _fmt(v):
    return repr(int(v)) if isinstance(v, (int, np.integer)) else repr(float(v))


def write_records_csv(path, records, extra=None):
    """Write records with full-precision values.

    ``extra`` maps additional leading column names to per-record values.
    """
    extra = extra or {}
    for name, col in extra.items():
        if len(col) != len(records):
            raise ValueError(f"column {name!r} has {len(col)} values for {len(records)} records")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(extra) + RECORD_COLUMNS)
        for i, r in enumerate(records):
            e = r.errors
            row = [_fmt(col[i]) for col in extra.values()]
            row += [_fmt(r.k1), _fmt(r.k2), _fmt(r.theta_t), _fmt(e.E1), _fmt(e.E2), _fmt(e.E3),
                    _fmt(e.E4), _fmt(e.E5), _fmt(e.E6)]
            row += [_fmt(v) for v in r.beta] + [_fmt(r.epsilon), _fmt(int(r.sentinel))]
            row += [_fmt(v) for v in r.b]
            w.writerow(row)


def read_records_csv(path):
    """Inverse of :func:`write_records_csv`; returns ``(records, extra)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    n_extra = len(header) - len(RECORD_COLUMNS)
    if n_extra < 0 or header[n_extra:] != RECORD_COLUMNS:
        raise ValueError(f"{path}: unexpected header")
    extra = {name: [] for name in header[:n_extra]}
    records = []
    for row in rows[1:]:
        for name, v in zip(header[:n_extra], row[:n_extra]):
            extra[name].append(float(v))
        vals = row[n_extra:]
        f = [float(v) for v in vals]
        errs = ErrorBundle(E1=f[3], E2=f[4], E3=f[5], E4=int(vals[6]), E5=int(vals[7]), E6=f[8])
        records.append(CandidateRecord(
            beta=np.array(f[9:19]), epsilon=f[19], b=np.array(f[21:]), errors=errs,
            theta_t=f[2], k1=f[0], k2=f[1], sentinel=bool(int(vals[20]))))
    return records, extra
