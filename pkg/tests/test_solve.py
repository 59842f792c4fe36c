import numpy as np
import pytest

from omdrift.solve import RidgeSystem, initial_ls, ridge_update, stationarity_residual

from oracles import ridge_projected_gradient


def e(i, n=38):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def test_initial_ls_identity():
    np.testing.assert_allclose(initial_ls(np.eye(38), e(0)), e(0))


def test_initial_ls_minimum_norm_rank_one():
    row = np.zeros((1, 38))
    row[0, :2] = 1.0
    np.testing.assert_allclose(initial_ls(row, [2.0]), e(0) + e(1), atol=1e-14)


def test_initial_ls_consistent_overdetermined():
    theta = np.zeros((2, 38))
    theta[:, 0] = 1.0
    np.testing.assert_allclose(initial_ls(theta, [3.0, 3.0]), 3 * e(0), atol=1e-14)


def test_initial_ls_row_mismatch():
    with pytest.raises(ValueError):
        initial_ls(np.eye(38), np.zeros(5))


def test_ridge_scalar_example():
    b = ridge_update(np.eye(38), e(0), e(0), np.ones(38, bool), 1.0, 1.0)
    np.testing.assert_allclose(b, 2 / 3 * e(0), atol=1e-15)


def test_ridge_without_penalty_is_least_squares(rng):
    theta = rng.normal(size=(60, 38))
    zdd = rng.normal(size=60)
    b = ridge_update(theta, zdd, rng.normal(size=38), np.ones(38, bool), 0.0, 0.0)
    np.testing.assert_allclose(b, initial_ls(theta, zdd), atol=1e-12)


def test_ridge_empty_support():
    b = ridge_update(np.eye(38), e(0), e(0), np.zeros(38, bool), 0.3, 0.1)
    assert not b.any()


def test_ridge_rejects_negative_weights():
    with pytest.raises(ValueError):
        ridge_update(np.eye(38), e(0), e(0), np.ones(38, bool), -1.0, 0.0)


def test_ridge_matches_projected_gradient(rng):
    for _ in range(10):
        theta = rng.normal(size=(20, 38))
        zdd = rng.normal(size=20)
        gb = rng.normal(size=38)
        support = rng.random(38) < 0.6
        k1, k2 = rng.uniform(0.05, 1), rng.uniform(0.05, 1)
        got = ridge_update(theta, zdd, gb, support, k1, k2)
        ref = ridge_projected_gradient(theta, zdd, gb, support, k1, k2)
        np.testing.assert_allclose(got, ref, atol=1e-6)
        assert not got[~support].any()
        assert stationarity_residual(theta, zdd, gb, support, k1, k2, got) < 1e-9


def test_norm_shrinks_with_k2(rng):
    theta = rng.normal(size=(40, 38))
    zdd = rng.normal(size=40)
    sys = RidgeSystem(theta, zdd)
    norms = [np.linalg.norm(sys.update(np.zeros(38), np.ones(38, bool), 0.0, k2))
             for k2 in (0.01, 0.1, 1.0, 10.0, 100.0)]
    assert all(a > b for a, b in zip(norms, norms[1:]))


def test_large_k1_pulls_towards_target(rng):
    theta = rng.normal(size=(40, 38))
    gb = rng.normal(size=38)
    b = ridge_update(theta, rng.normal(size=40), gb, np.ones(38, bool), 1e9, 0.0)
    np.testing.assert_allclose(b, gb, atol=1e-6)


def test_system_reuse_matches_one_shot(rng):
    theta = rng.normal(size=(30, 38))
    zdd = rng.normal(size=30)
    sys = RidgeSystem(theta, zdd)
    for _ in range(3):
        gb = rng.normal(size=38)
        support = rng.random(38) < 0.5
        np.testing.assert_array_equal(sys.update(gb, support, 0.2, 0.1),
                                      ridge_update(theta, zdd, gb, support, 0.2, 0.1))
