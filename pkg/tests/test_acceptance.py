"""End-to-end acceptance checks, one test per criterion.

Criteria 1-3 run the full 510-cell weight grid and take a few tens of
seconds each with the compiled core.
"""

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from omdrift.cli import case_beta
from omdrift.design import build_design, feature_matrix, second_diff
from omdrift.model import el_rhs, structure_map
from omdrift.recover import findbeta1
from omdrift.search import (
    HyperParams,
    NoRecordBelowCap,
    Problem,
    grid_search,
    initial_estimate,
    weight_grid,
    select_final,
    threshold_search,
)
from omdrift.simulate import BoundaryConditions, Trajectory, shoot
from omdrift.solve import ridge_update

from oracles import BRANCHES, draw_for_branch, ridge_projected_gradient, threshold_rule

BC = BoundaryConditions(0.0, math.sqrt(2.0))


@lru_cache(maxsize=None)
def path(name):
    beta, eps = case_beta(name)
    return shoot(beta, eps, BC, T=1.0, dt=1e-3)


@lru_cache(maxsize=None)
def fit(name, seed):
    """Selected record for one case and split seed, or the selection error."""
    design = build_design(path(name), 0.7, seed)
    problem = Problem.from_design(design)
    table = grid_search(problem, weight_grid(), init=initial_estimate(problem))
    try:
        return select_final(table)
    except NoRecordBelowCap as exc:
        return exc


def selected(name, seed):
    rec = fit(name, seed)
    if isinstance(rec, Exception):
        pytest.fail(f"case {name}, seed {seed}: no model selected ({rec})")
    return rec


def near(value, target, tol=0.05):
    return abs(value - target) <= tol


@pytest.mark.slow
def test_criterion_1_case_ii_end_to_end():
    supports = []
    for seed in (0, 1, 2):
        rec = selected("II", seed)
        supports.append(rec.support)
        assert rec.support == (1, 3), f"seed {seed}: support {rec.support}, beta {rec.beta}"
        assert near(rec.beta[1], 0.5) and near(rec.beta[3], -1.2), rec.beta
        assert near(rec.epsilon, 0.8), rec.epsilon
    assert len(set(supports)) == 1


@pytest.mark.slow
def test_criterion_2_case_i_end_to_end():
    rec = selected("I", 0)
    assert rec.support == (1, 3, 6), f"support {rec.support}, beta {rec.beta}"
    assert (rec.errors.E4, rec.errors.E5) == (3, 8)
    assert near(rec.beta[1], 0.5) and near(rec.beta[3], -1.2) and near(rec.beta[6], 1.0), rec.beta
    assert near(rec.epsilon, 0.8), rec.epsilon
    assert rec.errors.E1 <= 0.2 and rec.errors.E3 <= 1.0, rec.errors


@pytest.mark.slow
def test_criterion_3_case_iii_end_to_end():
    rec = selected("III", 0)
    assert rec.support == (7,), f"support {rec.support}, beta {rec.beta}"
    assert near(rec.beta[7], 1.0), rec.beta
    assert near(rec.epsilon, 0.8), rec.epsilon
    assert rec.errors.E3 <= 0.1, rec.errors


def test_criterion_4_expansion_identity():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        beta = rng.uniform(-1, 1, 10)
        eps = rng.uniform(0.1, 2)
        z = rng.uniform(-3, 3, 100)
        lhs = feature_matrix(z) @ structure_map(beta, eps)
        rhs = np.array([el_rhs(beta, eps, v) for v in z])
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / (1 + np.abs(rhs)))))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-10, worst
    assert elapsed < 1.0, elapsed


def test_criterion_5_round_trip():
    rng = np.random.default_rng(5)
    draws = [draw_for_branch(rng, br) for br in BRANCHES for _ in range(250)]
    start = time.perf_counter()
    models = [findbeta1(structure_map(beta, eps)) for beta, eps in draws]
    elapsed = time.perf_counter() - start
    for (beta, eps), m in zip(draws, models):
        assert np.max(np.abs(m.beta - beta)) <= 1e-8, (beta, m.beta)
        assert abs(m.epsilon - eps) <= 1e-8, (eps, m.epsilon)
    assert len(draws) == 1000
    assert elapsed < 1.0, elapsed


def test_criterion_6_ridge_oracle():
    rng = np.random.default_rng(6)
    for _ in range(50):
        theta = rng.normal(size=(20, 38))
        zdd = rng.normal(size=20)
        gb = rng.normal(size=38)
        support = rng.random(38) < 0.7
        k1, k2 = rng.uniform(0.05, 1), rng.uniform(0.05, 1)
        got = ridge_update(theta, zdd, gb, support, k1, k2)
        ref = ridge_projected_gradient(theta, zdd, gb, support, k1, k2)
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-6)


def test_criterion_7_differencing_order():
    def errors(dt):
        n = round(1.0 / dt)
        t = dt * np.arange(n + 1)
        err = np.abs(second_diff(Trajectory(T=1.0, dt=dt, z=np.sin(t))) + np.sin(t))
        return err[1:-1].max(), max(err[0], err[-1])

    for dt in (0.02, 0.01):
        coarse, fine = errors(dt), errors(dt / 2)
        assert coarse[0] / fine[0] >= 3.9, ("interior", dt, coarse[0] / fine[0])
        assert coarse[1] / fine[1] >= 3.9, ("boundary", dt, coarse[1] / fine[1])


def test_criterion_8_shooting():
    beta = np.zeros(10)
    beta[1] = 1.0
    tr = shoot(beta, 0.8, BC, T=1.0, dt=1e-3)
    exact = math.sqrt(2.0) * np.sinh(tr.t) / math.sinh(1.0)
    assert np.max(np.abs(tr.z - exact)) <= 1e-6
    for name in ("I", "II", "III"):
        z = path(name).z
        assert z[0] == 0.0
        assert abs(z[-1] - math.sqrt(2.0)) <= 1e-10, name


def test_criterion_9_search_mechanics():
    # rule arithmetic on constructed fixtures
    assert threshold_rule(0.1, 0.05, True) == (pytest.approx(0.15), 0.05)
    theta, h = threshold_rule(0.15, 0.05, False)
    assert theta == pytest.approx(0.075) and h == 0.025

    # the search itself, on case I data, over cells spread across the grid
    design = build_design(path("I"), 0.7, 0)
    problem = Problem.from_design(design)
    init = initial_estimate(problem)
    hp = HyperParams()
    cells = weight_grid()[::37]
    for k1, k2 in cells:
        ebest, trace = threshold_search(problem, init, k1, k2, hp)
        chain = [r.errors.E6 for r in ebest]
        assert all(a > b for a, b in zip(chain, chain[1:])), (k1, k2, chain)
        for r in ebest + trace:
            assert r.errors.E6 == r.errors.E1 + k1 * r.errors.E2 + k2 * r.errors.E5
        # replay the schedule from the accept/reject outcomes
        best = chain[0]
        theta, h = hp.theta_t0, hp.h0
        for r in trace:
            assert r.theta_t >= 0
            assert r.theta_t == pytest.approx(theta, abs=1e-12)
            improved = r.errors.E6 < best
            best = min(best, r.errors.E6)
            theta, h = threshold_rule(theta, h, improved)
