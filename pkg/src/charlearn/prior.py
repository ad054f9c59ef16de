"""Gaussian-KDE prior density of the reduced coordinates.

The density is a mixture of ``N_d`` isotropic Gaussian kernels centered at
rescaled training points.  The kernel width pairs the Silverman bandwidth
``s_sb = (4 / (N_d (2 + nu)))**(1 / (nu + 4))`` with the corrected width
``s_hat = s_sb / sqrt(s_sb**2 + (N_d - 1) / N_d)``; placing the kernels at
``(s_hat / s_sb) * eta_j`` makes the mixture reproduce the empirical mean
(zero) and identity covariance of normalized training coordinates exactly.

Only ``log zeta`` (the unnormalized log density) and its gradient are needed
downstream: the sampler drift depends on the score alone, so the mixture
normalization constant is kept in log form and never exponentiated.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

# Empirical-normalization tolerance for the closed-form moment identity.
_NORMALIZED_TOL = 1e-8


@dataclass(frozen=True)
class PriorKde:
    """Mixture centers (one per column) and the two bandwidths."""

    centers: np.ndarray
    s_sb: float
    s_hat: float

    @property
    def nu(self):
        return self.centers.shape[0]

    @property
    def n_kernels(self):
        return self.centers.shape[1]

    @property
    def scale_ratio(self):
        return self.s_hat / self.s_sb

    @property
    def log_c_nu(self):
        """Log normalization constant; kept in log form against underflow."""
        return -self.nu * (0.5 * np.log(2.0 * np.pi) + np.log(self.s_hat))

    @property
    def scaled_centers(self):
        return self.scale_ratio * self.centers


def silverman_bandwidth(n_samples, nu):
    """Multivariate Silverman bandwidth for ``n_samples`` points in R^nu."""
    return float((4.0 / (n_samples * (2.0 + nu))) ** (1.0 / (nu + 4.0)))


def fit_prior(reduced):
    """Fit the KDE prior to a reduced training set (centers kept by reference)."""
    eta = np.asarray(reduced.eta_matrix, dtype=float)
    nu, n_d = eta.shape
    s_sb = silverman_bandwidth(n_d, nu)
    s_hat = s_sb / np.sqrt(s_sb**2 + (n_d - 1) / n_d)
    return PriorKde(centers=eta, s_sb=s_sb, s_hat=float(s_hat))


def _kernel_exponents(prior, eta):
    """Log kernel weights: -(||scaled_center_j - eta||^2) / (2 s_hat^2).

    ``eta`` may be a vector or a matrix of column vectors; the result has one
    row per kernel (and one column per input vector in the batched case).
    """
    a = prior.scaled_centers
    eta = np.asarray(eta, dtype=float)
    if eta.ndim == 1:
        diff = a - eta[:, None]
        sq = np.sum(diff * diff, axis=0)
    else:
        sq = (
            np.sum(a * a, axis=0)[:, None]
            + np.sum(eta * eta, axis=0)[None, :]
            - 2.0 * (a.T @ eta)
        )
        np.maximum(sq, 0.0, out=sq)
    return -sq / (2.0 * prior.s_hat**2)


def log_zeta(prior, eta):
    """Log of the unnormalized KDE mixture, via log-sum-exp.

    Never ``-inf`` for finite input, though far in the tails the value is a
    large negative float.  Batched when ``eta`` has column vectors.
    """
    expo = _kernel_exponents(prior, eta)
    out = logsumexp(expo, axis=0) - np.log(prior.n_kernels)
    return float(out) if np.ndim(out) == 0 else out


def score(prior, eta):
    """Gradient of ``log_zeta``: softmax-weighted pull toward the centers."""
    eta = np.asarray(eta, dtype=float)
    expo = _kernel_exponents(prior, eta)
    expo -= expo.max(axis=0, keepdims=True)
    w = np.exp(expo)
    w /= w.sum(axis=0, keepdims=True)
    return (prior.scaled_centers @ w - eta) / prior.s_hat**2


def prior_moments_closed_form(prior):
    """Exact mean and second moment of the KDE mixture (no sampling).

    When the centers carry zero empirical mean and identity empirical
    covariance the mixture moments are exactly ``(0, I)``; otherwise the
    general mixture-moment formula is returned and a warning flags the
    non-normalized input.
    """
    eta = prior.centers
    nu, n_d = eta.shape
    mean_centers = eta.mean(axis=1)
    second_centers = (eta @ eta.T) / n_d
    normalized = False
    if n_d > 1:
        cov_centers = (second_centers - np.outer(mean_centers, mean_centers)) * (
            n_d / (n_d - 1)
        )
        normalized = (
            np.max(np.abs(mean_centers)) <= _NORMALIZED_TOL
            and np.max(np.abs(cov_centers - np.eye(nu))) <= _NORMALIZED_TOL
        )
    if normalized:
        return np.zeros(nu), np.eye(nu)
    warnings.warn(
        "KDE centers are not normalized; returning general mixture moments",
        stacklevel=2,
    )
    r = prior.scale_ratio
    mean = r * mean_centers
    second = prior.s_hat**2 * np.eye(nu) + r**2 * second_centers
    return mean, second
