"""Scaling and PCA reduction of the training data.

The training matrix holds ``N_d`` joint realizations ``x = (q, w)`` as
columns.  Components are min-max scaled to [0, 1], the scaled matrix is
centered and factored with a thin SVD, and the reduced coordinates are
normalized so their empirical mean is zero and their empirical covariance is
the identity.  Target realizations of the QoI block are mapped into the same
reduced coordinates through the pseudo-inverse projection matrix.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

# Singular values below this fraction of the largest are treated as zero
# when counting rank.
_RANK_RTOL = 1e-12
# Condition-number ceiling for the QoI block normal matrix.
_COND_LIMIT = 1e12


class DegenerateDataError(ValueError):
    """Raised when the training set carries no variance at all."""


class ProjectionError(ValueError):
    """Raised when the QoI block is too rank-deficient to project targets."""


@dataclass(frozen=True)
class RawDataset:
    """Training matrix (one realization per column) plus the target matrix.

    ``q_rows`` and ``w_rows`` partition the row index set: the QoI block and
    the control-parameter block.  ``target_matrix`` holds realizations of the
    QoI alone, one per column.
    """

    x_matrix: np.ndarray
    q_rows: range
    w_rows: range
    target_matrix: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_matrix, dtype=float)
        t = np.asarray(self.target_matrix, dtype=float)
        object.__setattr__(self, "x_matrix", x)
        object.__setattr__(self, "target_matrix", t)
        n_x = x.shape[0]
        if len(self.q_rows) + len(self.w_rows) != n_x:
            raise ValueError("q_rows and w_rows must partition the rows")
        if x.shape[1] < 2:
            raise ValueError("need at least two training realizations")
        if t.ndim != 2 or t.shape[0] != len(self.q_rows) or t.shape[1] < 1:
            raise ValueError("target matrix must be (n_q, N_r) with N_r >= 1")
        if not (np.isfinite(x).all() and np.isfinite(t).all()):
            raise ValueError("non-finite entries in dataset")

    @classmethod
    def from_blocks(cls, q_matrix, w_matrix, target_matrix):
        """Stack a QoI block on top of a control block."""
        q = np.atleast_2d(np.asarray(q_matrix, dtype=float))
        w = np.atleast_2d(np.asarray(w_matrix, dtype=float))
        if q.shape[1] != w.shape[1]:
            raise ValueError("q and w must have the same number of realizations")
        x = np.vstack([q, w])
        return cls(x, range(0, q.shape[0]), range(q.shape[0], x.shape[0]), target_matrix)

    @property
    def n_x(self):
        return self.x_matrix.shape[0]

    @property
    def n_q(self):
        return len(self.q_rows)

    @property
    def n_w(self):
        return len(self.w_rows)

    @property
    def n_samples(self):
        return self.x_matrix.shape[1]

    @property
    def n_targets(self):
        return self.target_matrix.shape[1]


@dataclass(frozen=True)
class ScalingParams:
    """Per-component affine map: scaled = (x - shift) / scale."""

    shift: np.ndarray
    scale: np.ndarray

    def apply(self, matrix, rows=None):
        shift, scale = self._block(rows)
        return (np.asarray(matrix, dtype=float) - shift[:, None]) / scale[:, None]

    def invert(self, matrix, rows=None):
        shift, scale = self._block(rows)
        return np.asarray(matrix, dtype=float) * scale[:, None] + shift[:, None]

    def _block(self, rows):
        if rows is None:
            return self.shift, self.scale
        idx = np.asarray(rows)
        return self.shift[idx], self.scale[idx]


@dataclass(frozen=True)
class ReducedBasis:
    """PCA artifacts of the scaled training matrix."""

    x_bar: np.ndarray
    phi: np.ndarray
    kappa: np.ndarray
    nu: int
    phi_q: np.ndarray
    phi_w: np.ndarray
    v_proj: np.ndarray | None
    eps_pca: float
    trace_cov: float
    q_rows: range
    w_rows: range

    @property
    def q_bar(self):
        return self.x_bar[np.asarray(self.q_rows)]

    @property
    def w_bar(self):
        return self.x_bar[np.asarray(self.w_rows)]


@dataclass(frozen=True)
class ReducedTrainingSet:
    """Training realizations in reduced coordinates, one per column."""

    eta_matrix: np.ndarray

    @property
    def nu(self):
        return self.eta_matrix.shape[0]

    @property
    def n_samples(self):
        return self.eta_matrix.shape[1]


@dataclass(frozen=True)
class ProjectedTargets:
    """Target realizations projected into the reduced coordinates."""

    eta_targ_matrix: np.ndarray
    q_bar: np.ndarray = field(repr=False)

    @property
    def n_targets(self):
        return self.eta_targ_matrix.shape[1]


def scale_dataset(raw):
    """Min-max scale each component of the training matrix to [0, 1].

    Returns the scaled dataset and the scaling parameters.  The target matrix
    is scaled with the same parameters as the QoI block of the training data.
    Constant components pass through with unit scale.
    """
    x = raw.x_matrix
    lo = x.min(axis=1)
    hi = x.max(axis=1)
    span = hi - lo
    degenerate = span == 0.0
    scale = np.where(degenerate, 1.0, span)
    shift = lo
    params = ScalingParams(shift=shift, scale=scale)
    scaled_x = params.apply(x)
    scaled_t = params.apply(raw.target_matrix, rows=raw.q_rows)
    scaled = RawDataset(scaled_x, raw.q_rows, raw.w_rows, scaled_t)
    return scaled, params


def fit_reduction(scaled, eps_pca):
    """Build the PCA reduced representation of the scaled training matrix.

    The reduced dimension is the smallest ``nu < N_d - 1`` whose relative
    PCA error is at most ``eps_pca``; if no such value exists it falls back
    to ``N_d - 1``.  The covariance trace is accumulated from per-component
    second moments, never materializing the full covariance matrix.
    """
    if not 0.0 < eps_pca < 1.0:
        raise ValueError("eps_pca must lie in (0, 1)")
    x = scaled.x_matrix
    n_d = scaled.n_samples
    x_bar = x.mean(axis=1)
    centered = x - x_bar[:, None]

    # tr{C} = sum of per-component sample variances; row-blocked so the
    # n_x x n_x covariance is never formed even for very tall matrices.
    trace_cov = 0.0
    for start in range(0, centered.shape[0], 4096):
        block = centered[start : start + 4096]
        trace_cov += float(np.sum(block * block))
    trace_cov /= n_d - 1

    phi_full, sing, _ = np.linalg.svd(centered, full_matrices=False)
    if sing[0] <= 0.0:
        raise DegenerateDataError("degenerate training set: all singular values zero")
    rank = int(np.count_nonzero(sing > _RANK_RTOL * sing[0]))

    kappa_full = sing**2 / (n_d - 1)
    cum = np.cumsum(kappa_full)
    errs = np.clip(1.0 - cum / trace_cov, 0.0, 1.0)

    # Smallest nu < N_d - 1 meeting the tolerance, else the full N_d - 1,
    # capped by the numerical rank so every retained eigenvalue is positive.
    max_nu = min(n_d - 1, rank)
    nu = max_nu
    for cand in range(1, max_nu):
        if errs[cand - 1] <= eps_pca:
            nu = cand
            break

    phi = phi_full[:, :nu]
    kappa = kappa_full[:nu]
    q_idx = np.asarray(scaled.q_rows)
    w_idx = np.asarray(scaled.w_rows)
    phi_q = phi[q_idx]
    phi_w = phi[w_idx]

    v_proj = _projection_matrix(phi_q, kappa)

    basis = ReducedBasis(
        x_bar=x_bar,
        phi=phi,
        kappa=kappa,
        nu=nu,
        phi_q=phi_q,
        phi_w=phi_w,
        v_proj=v_proj,
        eps_pca=float(eps_pca),
        trace_cov=trace_cov,
        q_rows=scaled.q_rows,
        w_rows=scaled.w_rows,
    )
    eta = (phi.T @ centered) / np.sqrt(kappa)[:, None]
    return basis, ReducedTrainingSet(eta_matrix=eta)


def _projection_matrix(phi_q, kappa):
    """Pseudo-inverse projector of the QoI block, or None when ill-posed."""
    gram = phi_q.T @ phi_q
    if np.linalg.cond(gram) > _COND_LIMIT:
        return None
    return np.linalg.solve(gram, phi_q.T).T / np.sqrt(kappa)[None, :]


def pca_error(basis, nu_test):
    """Relative PCA error retained by the leading ``nu_test`` eigenvalues."""
    if not 1 <= nu_test <= basis.nu:
        raise ValueError(f"nu_test must lie in [1, {basis.nu}]")
    retained = float(np.sum(basis.kappa[:nu_test]))
    return float(np.clip(1.0 - retained / basis.trace_cov, 0.0, 1.0))


def project_targets(basis, scaled_targets):
    """Project scaled target realizations into the reduced coordinates."""
    if basis.v_proj is None:
        raise ProjectionError("Q-block rank deficient; projection undefined")
    targets = np.atleast_2d(np.asarray(scaled_targets, dtype=float))
    q_bar = basis.q_bar
    eta_targ = basis.v_proj.T @ (targets - q_bar[:, None])
    if not np.isfinite(eta_targ).all():
        raise ProjectionError("non-finite projected targets")
    return ProjectedTargets(eta_targ_matrix=eta_targ, q_bar=q_bar)


def reconstruct(basis, eta):
    """Map reduced coordinates back to the (scaled) QoI and control blocks.

    Accepts a single vector or a matrix of column vectors; returns the
    corresponding ``(q, w)`` arrays in scaled coordinates.
    """
    eta = np.asarray(eta, dtype=float)
    single = eta.ndim == 1
    cols = eta[:, None] if single else eta
    lifted = np.sqrt(basis.kappa)[:, None] * cols
    q = basis.q_bar[:, None] + basis.phi_q @ lifted
    w = basis.w_bar[:, None] + basis.phi_w @ lifted
    if single:
        return q[:, 0], w[:, 0]
    return q, w


def save_model(path, basis, params, centers=None):
    """Serialize a fitted basis (and optional KDE centers) to a container."""
    from charlearn import matrixio

    sections = {
        "meta": np.array([[float(basis.nu), basis.eps_pca, basis.trace_cov, float(len(basis.q_rows))]]),
        "x_bar": basis.x_bar[None, :],
        "phi": basis.phi,
        "kappa": basis.kappa[None, :],
        "shift": params.shift[None, :],
        "scale": params.scale[None, :],
    }
    if centers is not None:
        sections["centers"] = np.asarray(centers, dtype=float)
    matrixio.save_sections(path, sections)


def load_model(path):
    """Load a serialized basis; returns ``(basis, params, centers_or_None)``."""
    from charlearn import matrixio

    sections = matrixio.load_sections(path)
    nu, eps_pca, trace_cov, n_q = sections["meta"][0]
    nu, n_q = int(nu), int(n_q)
    phi = sections["phi"]
    kappa = sections["kappa"][0]
    n_x = phi.shape[0]
    q_rows = range(0, n_q)
    w_rows = range(n_q, n_x)
    phi_q = phi[:n_q]
    phi_w = phi[n_q:]
    basis = ReducedBasis(
        x_bar=sections["x_bar"][0],
        phi=phi,
        kappa=kappa,
        nu=nu,
        phi_q=phi_q,
        phi_w=phi_w,
        v_proj=_projection_matrix(phi_q, kappa),
        eps_pca=float(eps_pca),
        trace_cov=float(trace_cov),
        q_rows=q_rows,
        w_rows=w_rows,
    )
    params = ScalingParams(shift=sections["shift"][0], scale=sections["scale"][0])
    return basis, params, sections.get("centers")
