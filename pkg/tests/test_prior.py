import numpy as np
import pytest

from charlearn.prior import (
    PriorKde,
    fit_prior,
    log_zeta,
    prior_moments_closed_form,
    score,
    silverman_bandwidth,
)
from charlearn.reduction import ReducedTrainingSet


def whitened_centers(nu, n_d, seed=0):
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal((nu, n_d))
    eta = eta - eta.mean(axis=1, keepdims=True)
    L = np.linalg.cholesky(np.cov(eta, ddof=1))
    return np.linalg.solve(L, eta)


def make_prior(nu, n_d, seed=0, whiten=True):
    if whiten:
        eta = whitened_centers(nu, n_d, seed)
    else:
        eta = np.random.default_rng(seed).standard_normal((nu, n_d))
    return fit_prior(ReducedTrainingSet(eta_matrix=eta))


# ---------------------------------------------------------------- bandwidths

def test_bandwidth_against_high_precision():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50
    n_d, nu = 1000, 99
    expected = float(
        (mpmath.mpf(4) / (n_d * (2 + nu))) ** (mpmath.mpf(1) / (nu + 4))
    )
    assert silverman_bandwidth(n_d, nu) == pytest.approx(expected, rel=1e-15)
    # corrected width from the same high-precision route
    s = mpmath.mpf(silverman_bandwidth(n_d, nu))
    expected_hat = float(s / mpmath.sqrt(s**2 + mpmath.mpf(n_d - 1) / n_d))
    prior = make_prior(nu, n_d, whiten=False)
    assert prior.s_hat == pytest.approx(expected_hat, rel=1e-14)


def test_bandwidth_invariant_relation():
    for nu, n_d in [(2, 5), (10, 100), (99, 1000)]:
        prior = make_prior(nu, n_d, whiten=False)
        expected = prior.s_sb / np.sqrt(prior.s_sb**2 + (n_d - 1) / n_d)
        assert prior.s_hat == pytest.approx(expected, abs=1e-14)


def test_corrected_width_below_sqrt2_silverman():
    for nu in (1, 3, 20, 99):
        for n_d in (2, 10, 1000):
            prior = make_prior(nu, n_d, seed=nu + n_d, whiten=False)
            assert prior.s_hat < np.sqrt(2.0) * prior.s_sb


def test_silverman_limit_in_dimension():
    n_d = 50
    values = [silverman_bandwidth(n_d, nu) for nu in (10, 100, 1000)]
    assert values[0] < values[1] < values[2] < 1.0


# ---------------------------------------------------------------- log density

def test_single_kernel_at_center():
    prior = PriorKde(centers=np.zeros((3, 1)), s_sb=0.5, s_hat=0.4)
    assert log_zeta(prior, np.zeros(3)) == pytest.approx(0.0, abs=1e-15)


def test_single_kernel_closed_form():
    prior = PriorKde(centers=np.zeros((3, 1)), s_sb=0.5, s_hat=0.4)
    rng = np.random.default_rng(1)
    for _ in range(5):
        eta = rng.standard_normal(3)
        expected = -np.dot(eta, eta) / (2 * 0.4**2)
        assert log_zeta(prior, eta) == pytest.approx(expected, rel=1e-12)


def test_log_zeta_matches_naive_sum():
    prior = make_prior(2, 5, seed=2)
    rng = np.random.default_rng(3)
    a = np.longdouble(prior.scale_ratio) * prior.centers.astype(np.longdouble)
    for _ in range(10):
        eta = rng.standard_normal(2) * 3
        diffs = a - eta[:, None].astype(np.longdouble)
        terms = np.exp(-np.sum(diffs * diffs, axis=0) / (2 * np.longdouble(prior.s_hat) ** 2))
        expected = float(np.log(terms.mean()))
        assert log_zeta(prior, eta) == pytest.approx(expected, abs=1e-12)


def test_log_zeta_nonpositive_and_finite_in_far_tail():
    prior = make_prior(4, 20, seed=4)
    rng = np.random.default_rng(5)
    for scale in (1.0, 5.0, 50.0):
        eta = rng.standard_normal(4) * scale
        value = log_zeta(prior, eta)
        assert np.isfinite(value)
        assert value <= 0.0


def test_log_zeta_permutation_invariant():
    prior = make_prior(3, 8, seed=6)
    perm = np.random.default_rng(7).permutation(8)
    shuffled = PriorKde(
        centers=prior.centers[:, perm], s_sb=prior.s_sb, s_hat=prior.s_hat
    )
    eta = np.array([0.3, -1.2, 0.8])
    assert log_zeta(shuffled, eta) == pytest.approx(log_zeta(prior, eta), rel=1e-14)


def test_log_zeta_batched_matches_single():
    prior = make_prior(3, 10, seed=8)
    pts = np.random.default_rng(9).standard_normal((3, 6))
    batch = log_zeta(prior, pts)
    singles = [log_zeta(prior, pts[:, k]) for k in range(6)]
    np.testing.assert_allclose(batch, singles, rtol=1e-14)


# ---------------------------------------------------------------- score

def test_score_single_kernel():
    prior = PriorKde(centers=np.zeros((3, 1)), s_sb=0.5, s_hat=0.4)
    eta = np.array([0.2, -0.7, 1.1])
    np.testing.assert_allclose(score(prior, eta), -eta / 0.4**2, rtol=1e-14)


def test_score_matches_finite_differences():
    prior = make_prior(3, 12, seed=10)
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(5):
        eta = rng.standard_normal(3)
        grad = score(prior, eta)
        fd = np.empty(3)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd[k] = (log_zeta(prior, eta + e) - log_zeta(prior, eta - e)) / (2 * h)
        np.testing.assert_allclose(grad, fd, rtol=1e-6, atol=1e-8)


def test_score_far_field_nearest_kernel():
    centers = np.array([[0.0, 6.0]])
    prior = fit_prior(ReducedTrainingSet(eta_matrix=centers))
    eta = np.array([20.0])
    nearest = prior.scale_ratio * 6.0
    expected = (nearest - 20.0) / prior.s_hat**2
    assert score(prior, eta)[0] == pytest.approx(expected, rel=1e-8)


def test_score_batched_matches_single():
    prior = make_prior(4, 9, seed=12)
    pts = np.random.default_rng(13).standard_normal((4, 5))
    batch = score(prior, pts)
    for k in range(5):
        np.testing.assert_allclose(batch[:, k], score(prior, pts[:, k]), rtol=1e-13)


# ---------------------------------------------------------------- moments

def test_moments_normalized_centers_are_exact():
    prior = make_prior(6, 40, seed=14)
    mean, second = prior_moments_closed_form(prior)
    np.testing.assert_allclose(mean, np.zeros(6), atol=1e-12)
    np.testing.assert_allclose(second, np.eye(6), atol=1e-12)


def test_moments_single_center_general_formula():
    prior = PriorKde(centers=np.zeros((3, 1)), s_sb=0.5, s_hat=0.4)
    with pytest.warns(UserWarning):
        mean, second = prior_moments_closed_form(prior)
    np.testing.assert_allclose(mean, np.zeros(3))
    np.testing.assert_allclose(second, 0.4**2 * np.eye(3))


def test_moments_match_monte_carlo_mixture():
    rng = np.random.default_rng(15)
    centers = rng.standard_normal((2, 4)) * 1.7 + 0.3
    prior = fit_prior(ReducedTrainingSet(eta_matrix=centers))
    with pytest.warns(UserWarning):
        mean, second = prior_moments_closed_form(prior)

    n = 10**6
    comp = rng.integers(0, 4, size=n)
    draws = (
        prior.scale_ratio * centers[:, comp]
        + prior.s_hat * rng.standard_normal((2, n))
    )
    mc_mean = draws.mean(axis=1)
    mc_second = (draws @ draws.T) / n
    # three standard errors, entrywise
    se_mean = draws.std(axis=1) / np.sqrt(n)
    np.testing.assert_array_less(np.abs(mean - mc_mean), 3 * se_mean + 1e-12)
    prod_se = np.sqrt(np.einsum("in,jn->ij", draws**2, draws**2) / n) / np.sqrt(n)
    np.testing.assert_array_less(np.abs(second - mc_second), 3 * prod_se + 1e-12)
