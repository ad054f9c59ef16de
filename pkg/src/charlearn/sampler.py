"""Dissipative-Hamiltonian MCMC generator of the constrained learned set.

``N = N_d * n_mc`` chains evolve positions and momenta under the stochastic
dynamics whose invariant position marginal is the KDE prior tilted by the
constraint term ``-<lambda, h(eta)>``.  Integration uses the Stormer-Verlet
scheme adapted to the dissipative case: half-step position, damped momentum
update with drift and Wiener increment, half-step position.  One sample per
chain is read off after ``m_s`` steps.

Chains never interact, and the noise is a stateless lookup, so serial and
thread-parallel stepping produce bit-identical output.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from charlearn.constraints import constraint_pull
from charlearn.noise import NoiseBank
from charlearn.prior import score


class ChainDivergenceError(RuntimeError):
    """A chain produced a non-finite state."""


# Chains are processed in fixed-width column blocks in every execution mode.
# BLAS products are only bit-reproducible for identical operand shapes, so a
# fixed block width is what makes serial, threaded, and re-run outputs
# bit-identical chain by chain.
_CHAIN_BLOCK = 2048


def _block_spans(n_chains):
    return [
        (lo, min(lo + _CHAIN_BLOCK, n_chains))
        for lo in range(0, n_chains, _CHAIN_BLOCK)
    ]


@dataclass(frozen=True)
class SamplerConfig:
    """Integrator and ensemble parameters.

    Defaults follow the reference operating point: ``f0 = 4`` damping,
    ``delta_t = 0.2188``, ``m_s = 30`` steps to stationarity.
    """

    f0: float = 4.0
    delta_t: float = 0.2188
    m_s: int = 30
    n_mc: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.f0 < 0.0:
            raise ValueError("f0 must be nonnegative")
        if self.delta_t <= 0.0:
            raise ValueError("delta_t must be positive")
        if self.m_s < 0:
            raise ValueError("m_s must be nonnegative")
        if self.n_mc < 1:
            raise ValueError("n_mc must be at least 1")

    @property
    def gamma(self):
        return self.f0 * self.delta_t / 4.0

    def noise_bank(self, nu):
        return NoiseBank(self.seed, nu, self.delta_t)


@dataclass(frozen=True)
class ChainState:
    """Positions and momenta of all chains (columns) at one step."""

    u: np.ndarray
    v: np.ndarray
    step: int = 0

    def __post_init__(self):
        if self.u.shape != self.v.shape:
            raise ValueError("position and momentum blocks must match")

    @property
    def n_chains(self):
        return self.u.shape[1]


def init_chains(reduced, cfg, noise=None):
    """Initial state: positions copy the training points, ``n_mc`` times over.

    Chain ``ell = j + (k - 1) * N_d`` starts at training point ``j``; the
    momenta come from the noise bank's reserved stream and stay fixed across
    Newton iterations.
    """
    eta = np.asarray(reduced.eta_matrix, dtype=float)
    nu, n_d = eta.shape
    n_chains = n_d * cfg.n_mc
    if noise is None:
        noise = cfg.noise_bank(nu)
    u0 = np.tile(eta, (1, cfg.n_mc))
    v0 = noise.initial_momenta(n_chains)
    return ChainState(u=u0, v=v0, step=0)


def drift(prior, spec, lam, u):
    """Drift field: prior score minus the constraint pull ``[grad h] lam``.

    Accepts a single position or a matrix of column vectors.  Wide inputs
    are evaluated in fixed-width column blocks (see ``_CHAIN_BLOCK``).
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    pts = u[:, None] if single else u
    lam = np.asarray(lam, dtype=float)
    if pts.shape[1] <= _CHAIN_BLOCK:
        out = score(prior, pts) - constraint_pull(spec, lam, pts)
    else:
        out = np.concatenate(
            [
                score(prior, pts[:, lo:hi]) - constraint_pull(spec, lam, pts[:, lo:hi])
                for lo, hi in _block_spans(pts.shape[1])
            ],
            axis=1,
        )
    return out[:, 0] if single else out


def _sv_core(u, v, drift_fn, dt, gamma, f0, dw):
    """One Stormer-Verlet update of (u, v) given the Wiener increment block."""
    u_half = u + (dt / 2.0) * v
    v_new = (
        (1.0 - gamma) / (1.0 + gamma) * v
        + (dt / (1.0 + gamma)) * drift_fn(u_half)
        + (np.sqrt(f0) / (1.0 + gamma)) * dw
    )
    u_new = u_half + (dt / 2.0) * v_new
    return u_new, v_new


def _check_finite(u, v, step, first_chain=0):
    bad = ~(np.isfinite(u).all(axis=0) & np.isfinite(v).all(axis=0))
    if bad.any():
        ell = first_chain + int(np.argmax(bad))
        raise ChainDivergenceError(f"chain divergence at (ell={ell}, m={step})")


def stormer_verlet_step(state, lam, cfg, prior, spec, noise):
    """Advance every chain by one step; raises on non-finite states."""
    if state.step >= cfg.m_s:
        raise ValueError("state already at the final step")
    _check_finite(state.u, state.v, state.step)
    dw = noise.increments(state.step, state.n_chains)
    u, v = _sv_core(
        state.u,
        state.v,
        lambda pts: drift(prior, spec, lam, pts),
        cfg.delta_t,
        cfg.gamma,
        cfg.f0,
        dw,
    )
    _check_finite(u, v, state.step)
    return ChainState(u=u, v=v, step=state.step + 1)


def run_chains(init, lam, cfg, prior, spec, noise=None, threads=1):
    """Integrate ``m_s`` steps and return the final positions (nu, N).

    Output is a pure function of ``(seed, lam, init, cfg)``; with
    ``threads > 1`` the chain axis is block-partitioned but the result is
    bit-identical to the serial run.
    """
    if init.step != 0:
        raise ValueError("chains must start at step 0")
    if noise is None:
        noise = cfg.noise_bank(init.u.shape[0])
    lam = np.asarray(lam, dtype=float)
    if cfg.m_s == 0:
        return init.u.copy()
    if threads and threads > 1:
        return _run_blocked(init, lam, cfg, prior, spec, noise, threads)

    state = init
    for _ in range(cfg.m_s):
        state = stormer_verlet_step(state, lam, cfg, prior, spec, noise)
    return state.u


def _run_blocked(init, lam, cfg, prior, spec, noise, threads):
    spans = _block_spans(init.n_chains)

    def advance(span):
        lo, hi = span
        u = init.u[:, lo:hi]
        v = init.v[:, lo:hi]
        for m in range(cfg.m_s):
            dw = noise.increments(m, hi - lo, first_chain=lo)
            u, v = _sv_core(
                u,
                v,
                lambda pts: drift(prior, spec, lam, pts),
                cfg.delta_t,
                cfg.gamma,
                cfg.f0,
                dw,
            )
            _check_finite(u, v, m, first_chain=lo)
        return u

    with ThreadPoolExecutor(max_workers=min(threads, len(spans))) as pool:
        blocks = list(pool.map(advance, spans))
    return np.concatenate(blocks, axis=1)
