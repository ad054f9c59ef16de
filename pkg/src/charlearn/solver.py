"""Damped Newton iteration on the constraint multiplier.

The multiplier solves ``E[h(H_lam)] = b``.  The dual objective cannot be
evaluated (its normalization constant is out of reach in high dimension),
but its gradient ``b - E[h(H_lam)]`` and Hessian ``cov(h(H_lam))`` are plain
Monte-Carlo estimates over the learned set, so each iteration regenerates
the chains at the current multiplier (with common random numbers and warm
starts) and applies a relaxed Newton update.  The reported solution is the
iterate with the smallest relative constraint error.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from charlearn.constraints import eval_hc
from charlearn.sampler import ChainState, init_chains, run_chains


class SolverAbort(RuntimeError):
    """Solve aborted; carries the trace accumulated so far."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SolverConfig:
    """Newton loop parameters.

    The relaxation factor starts at ``alpha0``, grows by ``alpha_grow``
    (clamped at 1) after an iteration that reduced the error, and shrinks by
    ``alpha_shrink`` (floored at ``alpha_min``) after an increase.

    Two safeguards keep the stochastic Newton step inside its basin.  With
    ``hessian_jitter = None`` the covariance is regularized adaptively:
    ``max(1e-8 * trace / N_r, lm0 * lambda_max)``, a Levenberg-Marquardt
    term that follows the same grow/shrink schedule as the relaxation
    (dead features otherwise invert to astronomically large multiplier
    components).  The step is then rescaled so its tilt -- the largest
    change it induces in the log-weight ``<lambda, h>`` over the current
    samples -- stays below an adaptive cap starting at ``tilt_cap0``.
    An explicit ``hessian_jitter`` disables the adaptive regularization.
    """

    i_max: int = 10
    alpha0: float = 0.3
    alpha_grow: float = 1.5
    alpha_shrink: float = 0.5
    alpha_min: float = 0.01
    hessian_jitter: float | None = None
    lm0: float = 0.1
    tilt_cap0: float = 2.0
    err_target: float | None = None
    cache_sets: bool = True

    def __post_init__(self):
        if self.i_max < 1:
            raise ValueError("i_max must be at least 1")
        if not 0.0 < self.alpha0 <= 1.0:
            raise ValueError("alpha0 must lie in (0, 1]")
        if self.hessian_jitter is not None and self.hessian_jitter < 0.0:
            raise ValueError("hessian_jitter must be nonnegative")
        if self.lm0 < 0.0 or self.tilt_cap0 <= 0.0:
            raise ValueError("lm0 must be nonnegative and tilt_cap0 positive")


_LM_MIN = 1e-4
_LM_MAX = 1.0
_TILT_CAP_MIN = 0.25
_TILT_CAP_MAX = 16.0


@dataclass
class SolverTrace:
    """Multipliers, errors, and relaxation factors per iteration."""

    lambdas: list = field(default_factory=list)
    errs: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    i_sol: int = 0
    learned_set_sol: np.ndarray | None = None

    @property
    def n_iterations(self):
        return len(self.errs)

    @property
    def lambda_sol(self):
        return self.lambdas[self.i_sol - 1]

    @property
    def err_sol(self):
        return self.errs[self.i_sol - 1]


def estimate_gradient(samples, spec):
    """Gradient estimate ``b - mean h`` over the sample columns."""
    return spec.b_c - eval_hc(spec, samples).mean(axis=1)


def estimate_hessian(samples, spec, jitter):
    """Covariance of the feature cloud plus ``jitter`` on the diagonal."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] < 2:
        raise ValueError("covariance undefined for fewer than two samples")
    features = eval_hc(spec, samples)
    return _hessian_from_features(features, jitter)


def _hessian_from_features(features, jitter):
    cov = np.cov(features, ddof=1)
    cov = np.atleast_2d(cov)
    cov = 0.5 * (cov + cov.T)
    return cov + jitter * np.eye(cov.shape[0])


def newton_step(lam, grad, hess, alpha):
    """Relaxed Newton update via a symmetric positive-definite solve."""
    try:
        factor = cho_factor(hess, lower=True)
    except LinAlgError as exc:
        cond = np.linalg.cond(hess)
        raise RuntimeError(
            f"Hessian not PD after jitter (condition estimate {cond:.3e})"
        ) from exc
    return lam - alpha * cho_solve(factor, grad)


def err(samples, spec):
    """Relative constraint error ``||b - mean h|| / ||b||``."""
    mean_h = eval_hc(spec, np.atleast_2d(np.asarray(samples, dtype=float))).mean(axis=1)
    return float(np.linalg.norm(spec.b_c - mean_h) / np.linalg.norm(spec.b_c))


def _resolve_jitter(cfg, cov, lm):
    if cfg.hessian_jitter is not None:
        return cfg.hessian_jitter
    n_r = cov.shape[0]
    lam_max = float(np.linalg.eigvalsh(cov)[-1]) if n_r > 1 else float(cov[0, 0])
    return max(1e-8 * float(np.trace(cov)) / n_r, lm * lam_max)


def solve_lambda(prior, spec, reduced, sampler_cfg, solver_cfg, noise=None, threads=1):
    """Run the Newton loop and return the full trace.

    Iteration 1 starts the chains at the training points; later iterations
    warm-start positions from the previous learned set while reusing the
    fixed initial momenta and the same noise values per (chain, step).  On
    chain divergence or Hessian failure a ``SolverAbort`` carrying the
    partial trace is raised.
    """
    nu = reduced.nu
    n_r = spec.n_constraints
    if noise is None:
        noise = sampler_cfg.noise_bank(nu)
    state0 = init_chains(reduced, sampler_cfg, noise=noise)

    trace = SolverTrace()
    cached = [] if solver_cfg.cache_sets else None
    lam = np.zeros(n_r)
    alpha = solver_cfg.alpha0
    tilt_cap = solver_cfg.tilt_cap0
    lm = solver_cfg.lm0
    positions = None

    for i in range(1, solver_cfg.i_max + 1):
        if i == 1:
            state = state0
        else:
            state = ChainState(u=positions, v=state0.v, step=0)
        try:
            samples = run_chains(
                state, lam, sampler_cfg, prior, spec, noise=noise, threads=threads
            )
        except RuntimeError as exc:
            _finalize(trace, cached)
            raise SolverAbort(str(exc), trace) from exc
        positions = samples
        if cached is not None:
            cached.append(samples)

        features = eval_hc(spec, samples)
        mean_h = features.mean(axis=1)
        e = float(np.linalg.norm(spec.b_c - mean_h) / np.linalg.norm(spec.b_c))

        if i > 1:
            if e < trace.errs[-1]:
                alpha = min(1.0, alpha * solver_cfg.alpha_grow)
                tilt_cap = min(_TILT_CAP_MAX, tilt_cap * solver_cfg.alpha_grow)
                lm = max(_LM_MIN, lm * 0.5)
            else:
                alpha = max(solver_cfg.alpha_min, alpha * solver_cfg.alpha_shrink)
                tilt_cap = max(_TILT_CAP_MIN, tilt_cap * solver_cfg.alpha_shrink)
                lm = min(_LM_MAX, lm * 2.0)

        trace.lambdas.append(lam.copy())
        trace.errs.append(e)
        trace.alphas.append(alpha)

        if solver_cfg.err_target is not None and e <= solver_cfg.err_target:
            break

        grad = spec.b_c - mean_h
        cov = _hessian_from_features(features, 0.0)
        jitter = _resolve_jitter(solver_cfg, cov, lm)
        hess = cov + jitter * np.eye(n_r)
        try:
            step = newton_step(lam, grad, hess, alpha) - lam
        except RuntimeError as exc:
            _finalize(trace, cached)
            raise SolverAbort(str(exc), trace) from exc
        tilt = float(np.abs(step @ features).max())
        if tilt > tilt_cap:
            step *= tilt_cap / tilt
        lam = lam + step

    _finalize(trace, cached)
    if trace.learned_set_sol is None:
        trace.learned_set_sol = _regenerate(
            trace, prior, spec, reduced, sampler_cfg, noise, threads
        )
    return trace


def _finalize(trace, cached):
    if not trace.errs:
        return
    trace.i_sol = int(np.argmin(trace.errs)) + 1
    if cached is not None:
        trace.learned_set_sol = cached[trace.i_sol - 1]


def _regenerate(trace, prior, spec, reduced, sampler_cfg, noise, threads):
    """Deterministic replay of the recorded multipliers up to the selected one."""
    state0 = init_chains(reduced, sampler_cfg, noise=noise)
    positions = None
    samples = None
    for i, lam in enumerate(trace.lambdas[: trace.i_sol], start=1):
        state = state0 if i == 1 else ChainState(u=positions, v=state0.v, step=0)
        samples = run_chains(
            state, lam, sampler_cfg, prior, spec, noise=noise, threads=threads
        )
        positions = samples
    return samples
