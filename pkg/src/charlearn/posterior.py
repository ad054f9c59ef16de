"""Posterior ensembles in physical coordinates and reporting statistics."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import gaussian_kde

from charlearn.reduction import reconstruct


@dataclass(frozen=True)
class PosteriorEnsemble:
    """Reconstructed posterior samples of the QoI and control blocks."""

    q_samples: np.ndarray
    w_samples: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def n_samples(self):
        return self.q_samples.shape[1]


def build_posterior(basis, params, learned, metadata=None):
    """Lift a learned set back to physical coordinates.

    Columns are reconstructed through the reduced basis and then un-scaled
    with the training scaling parameters.
    """
    learned = np.atleast_2d(np.asarray(learned, dtype=float))
    q_scaled, w_scaled = reconstruct(basis, learned)
    q = params.invert(q_scaled, rows=basis.q_rows)
    w = params.invert(w_scaled, rows=basis.w_rows)
    return PosteriorEnsemble(q_samples=q, w_samples=w, metadata=dict(metadata or {}))


def mean_square_norm(samples, component):
    """Root of the empirical second moment of one component."""
    row = np.atleast_2d(np.asarray(samples, dtype=float))[component]
    return float(np.sqrt(np.mean(row**2)))


def marginal_pdf(samples, grid):
    """1-D Gaussian KDE with the Silverman bandwidth, evaluated on a grid.

    Degenerate (zero-variance) samples trigger a warning and fall back to a
    narrow kernel around the common value.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    grid = np.asarray(grid, dtype=float)
    if samples.size < 2:
        raise ValueError("need at least two samples")
    if np.std(samples) == 0.0:
        warnings.warn(
            "zero-variance samples: marginal is a Dirac; returning narrow kernel",
            stacklevel=2,
        )
        width = 1e-3 * max(1.0, abs(samples[0]))
        z = (grid - samples[0]) / width
        return np.exp(-0.5 * z**2) / (width * np.sqrt(2.0 * np.pi))
    kde = gaussian_kde(samples, bw_method="silverman")
    return kde(grid)


def default_grid(samples, n_points=256, span=4.0):
    """Evaluation grid spanning ``span`` sample standard deviations."""
    samples = np.asarray(samples, dtype=float).ravel()
    center = samples.mean()
    width = np.std(samples)
    if width == 0.0:
        width = max(1.0, abs(center)) * 1e-3
    return np.linspace(center - span * width, center + span * width, n_points)
