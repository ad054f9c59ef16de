"""Kernel feature map built on the projected targets.

Each projected target contributes one feature
``h_r(eta) = exp(-||eta - eta_targ_r||^2 / (nu s^2))`` with the Silverman
bandwidth ``s`` computed from the number of targets.  The constraint imposed
on the learned measure is ``E[h(H)] = b`` where the target moment vector
``b`` averages the same kernels over the target cloud itself.
"""

import warnings
from dataclasses import dataclass

import numpy as np

# Pairwise target distance below which the positive-definiteness argument
# behind the feature Gram matrix degrades.
_DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class ConstraintSpec:
    """Projected targets (one per column), bandwidth, and target moments."""

    eta_targ: np.ndarray
    s: float
    b_c: np.ndarray

    @property
    def nu(self):
        return self.eta_targ.shape[0]

    @property
    def n_constraints(self):
        return self.eta_targ.shape[1]

    @property
    def inv_len(self):
        """Precomputed 1 / (nu s^2)."""
        return 1.0 / (self.nu * self.s**2)


def bandwidth_s(n_r, nu):
    """Silverman bandwidth for ``n_r`` realizations in R^nu."""
    if n_r < 1 or nu < 1:
        raise ValueError("n_r and nu must be positive")
    return float((4.0 / (n_r * (2.0 + nu))) ** (1.0 / (nu + 4.0)))


def build_constraint_spec(projected):
    """Assemble the feature map from projected targets (bandwidth + moments)."""
    eta_targ = np.asarray(projected.eta_targ_matrix, dtype=float)
    nu, n_r = eta_targ.shape
    s = bandwidth_s(n_r, nu)
    b_c = compute_bc(eta_targ, s)
    return ConstraintSpec(eta_targ=eta_targ, s=s, b_c=b_c)


def _sq_dists(targets, points):
    """Squared distances, (N_r, M), via the inner-product expansion."""
    sq = (
        np.sum(targets * targets, axis=0)[:, None]
        + np.sum(points * points, axis=0)[None, :]
        - 2.0 * (targets.T @ points)
    )
    np.maximum(sq, 0.0, out=sq)
    return sq


def eval_hc(spec, eta):
    """Feature vector at one point, or an (N_r, M) block for column vectors."""
    eta = np.asarray(eta, dtype=float)
    single = eta.ndim == 1
    pts = eta[:, None] if single else eta
    h = np.exp(-spec.inv_len * _sq_dists(spec.eta_targ, pts))
    return h[:, 0] if single else h


def grad_hc(spec, u):
    """Gradient of the feature map at ``u``: (nu, N_r) matrix of columns."""
    u = np.asarray(u, dtype=float)
    diff = spec.eta_targ - u[:, None]
    h = np.exp(-spec.inv_len * np.sum(diff * diff, axis=0))
    return (2.0 * spec.inv_len) * diff * h[None, :]


def constraint_pull(spec, lam, points):
    """Batched ``[grad h] @ lam`` over column vectors, for the sampler drift."""
    h = eval_hc(spec, points)
    weighted = lam[:, None] * h
    return (2.0 * spec.inv_len) * (
        spec.eta_targ @ weighted - points * weighted.sum(axis=0)[None, :]
    )


def compute_bc(eta_targ, s):
    """Target moment vector: kernel average over the target cloud itself."""
    eta_targ = np.asarray(eta_targ, dtype=float)
    nu, n_r = eta_targ.shape
    sq = _sq_dists(eta_targ, eta_targ)
    if n_r > 1:
        off_diag = sq + np.diag(np.full(n_r, np.inf))
        if np.sqrt(off_diag.min()) < _DUPLICATE_TOL:
            warnings.warn(
                "duplicated targets weaken constraint independence", stacklevel=2
            )
    return np.exp(-sq / (nu * s**2)).mean(axis=1)


def constraint_mismatch(spec, samples):
    """Euclidean distance between the empirical feature mean and the target."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    mean_h = eval_hc(spec, samples).mean(axis=1)
    return float(np.linalg.norm(mean_h - spec.b_c))
