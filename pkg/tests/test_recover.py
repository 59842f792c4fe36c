import numpy as np
import pytest

from omdrift import kernels
from omdrift._pykernels import cascade as py_cascade
from omdrift.model import structure_map
from omdrift.recover import SENTINEL, findbeta0, findbeta1, hard_threshold

from oracles import BRANCHES, draw_for_branch

CASE_I = np.array([0, 0.5, 0, -1.2, 0, 0, 1.0, 0, 0, 0])


def test_zero_gives_sentinels():
    m = findbeta1(np.zeros(38))
    assert m.beta[0] == SENTINEL and not m.beta[1:].any()
    assert m.epsilon == SENTINEL
    assert m.beta0_sentinel and m.epsilon_sentinel and m.is_sentinel


def test_case_i_round_trip():
    m = findbeta1(structure_map(CASE_I, 0.8))
    np.testing.assert_allclose(m.beta, CASE_I, atol=1e-10)
    assert m.epsilon == pytest.approx(0.8, abs=1e-10)
    assert not m.is_sentinel


@pytest.mark.parametrize("branch", BRANCHES)
def test_round_trip_per_branch(branch):
    rng = np.random.default_rng(BRANCHES.index(branch))
    for _ in range(250):
        beta, eps = draw_for_branch(rng, branch)
        m = findbeta1(structure_map(beta, eps))
        np.testing.assert_allclose(m.beta, beta, rtol=0, atol=1e-8)
        assert m.epsilon == pytest.approx(eps, abs=1e-8)


def test_quintic_head_round_trip(rng):
    for _ in range(200):
        beta = rng.uniform(-1, 1, 10)
        beta[5] = rng.choice([-1, 1]) * rng.uniform(0.2, 1)
        eps = rng.uniform(0.1, 2)
        m = findbeta1(structure_map(beta, eps))
        np.testing.assert_allclose(m.beta, beta, atol=1e-8)
        assert m.epsilon == pytest.approx(eps, abs=1e-8)


def test_linear_drift_noise_is_unidentifiable():
    beta = np.array([0.3, 0.7, 0, 0, 0, 0, 0, 0, 0, 0])
    m = findbeta1(structure_map(beta, 0.5))
    np.testing.assert_allclose(m.beta, beta, atol=1e-14)
    assert m.epsilon == SENTINEL and m.epsilon_sentinel and not m.beta0_sentinel


def test_pinning_keeps_zeros():
    m = findbeta0(structure_map(CASE_I, 0.8), CASE_I)
    np.testing.assert_allclose(m.beta, CASE_I, atol=1e-10)
    assert m.epsilon == pytest.approx(0.8, abs=1e-10)


def test_pinning_all_zero_prior():
    m = findbeta0(structure_map(CASE_I, 0.8), np.zeros(10))
    assert not m.beta.any()
    assert m.epsilon == SENTINEL and m.is_sentinel


def test_dense_prior_equals_findbeta1(rng):
    for _ in range(20):
        b = structure_map(rng.uniform(-1, 1, 10), rng.uniform(0.1, 2)) + 0.01 * rng.normal(size=38)
        a, c = findbeta0(b, np.ones(10)), findbeta1(b)
        np.testing.assert_array_equal(a.beta, c.beta)
        assert a.epsilon == c.epsilon


def test_pins_hold_on_noisy_input(rng):
    for _ in range(50):
        b = rng.normal(size=38)
        prior = (rng.random(10) < 0.5).astype(float)
        m = findbeta0(b, prior)
        assert not m.beta[prior == 0].any()
        assert np.isfinite(m.epsilon) and m.epsilon >= 0


def test_prior_length_checked():
    with pytest.raises(ValueError):
        findbeta0(np.zeros(38), np.ones(9))


def test_hard_threshold_examples():
    beta = np.array([0.05, 0.5, 0, -1.2, 0, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(hard_threshold(beta, 0.1), [0, 0.5, 0, -1.2, 0, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(hard_threshold(beta, 0.0), beta)
    assert not hard_threshold(np.full(10, 0.09), 0.1).any()
    # strict comparison keeps entries equal to the threshold
    assert hard_threshold(np.full(10, 0.1), 0.1).all()


def test_hard_threshold_does_not_mutate():
    beta = np.full(10, 0.01)
    hard_threshold(beta, 1.0)
    assert beta.all()


def test_hard_threshold_rejects_negative():
    with pytest.raises(ValueError):
        hard_threshold(np.ones(10), -0.1)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled core not built")
def test_backends_agree_on_cascade(rng):
    for _ in range(300):
        b = rng.normal(size=38) * (rng.random(38) < 0.5)
        free = rng.random(10) < 0.7
        got = kernels.cascade(b, free)
        ref = py_cascade(b, free)
        np.testing.assert_allclose(got[0], ref[0], rtol=1e-9, atol=1e-9)
        assert got[1] == pytest.approx(ref[1], rel=1e-9, abs=1e-9)
        assert got[2:] == ref[2:]
