"""Counter-based noise streams shared across Newton iterations.

Chains consume common random numbers: the Wiener increment fed to chain
``ell`` at step ``m``, component ``alpha``, is a pure function of
``(seed, ell, m, alpha)`` and is therefore identical no matter how the
Lagrange multiplier evolves, how many chains run, or how stepping is split
across threads.

The lookup rides on the Philox counter-based generator: stream words are
placed in the counter so that one vectorized raw draw per step covers all
chains, while a single ``(ell, m, alpha)`` value remains addressable by
pointing the counter at its block.  Raw 64-bit words become standard normals
through the inverse normal CDF.
"""

import hashlib

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

# Domain tags keeping the step-noise and initial-momentum streams disjoint.
_DOMAIN_STEPS = 0
_DOMAIN_MOMENTA = 1

_U64 = np.uint64
_OUTPUTS_PER_BLOCK = 4


def derive_seed(master, label):
    """Derive a labeled 64-bit sub-seed from a master seed."""
    digest = hashlib.blake2b(
        f"{int(master)}:{label}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


def _to_normals(raw):
    # (x >> 11) spans [0, 2^53); the half-step keeps u strictly inside (0, 1).
    u = ((raw >> _U64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


class NoiseBank:
    """Stateless Gaussian lookup keyed on ``(seed, chain, step, component)``."""

    def __init__(self, seed, nu, delta_t):
        if nu < 1:
            raise ValueError("nu must be positive")
        if delta_t <= 0.0:
            raise ValueError("delta_t must be positive")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.nu = int(nu)
        self.delta_t = float(delta_t)
        self._blocks_per_chain = -(-self.nu // _OUTPUTS_PER_BLOCK)

    def _raw(self, domain, m, first_chain, n_chains):
        start_block = first_chain * self._blocks_per_chain
        gen = Philox(
            key=[self.seed, domain], counter=[start_block, int(m), 0, 0]
        )
        raw = gen.random_raw(_OUTPUTS_PER_BLOCK * self._blocks_per_chain * n_chains)
        table = raw.reshape(n_chains, _OUTPUTS_PER_BLOCK * self._blocks_per_chain)
        return table[:, : self.nu]

    def _normals(self, domain, m, n_chains):
        return _to_normals(self._raw(domain, m, 0, n_chains)).T

    def increments(self, m, n_chains, first_chain=0):
        """Wiener increments for step ``m``: (nu, n_chains), scaled by sqrt(dt).

        ``first_chain`` offsets the chain axis; the values for a given chain
        do not depend on how the chain axis is partitioned.
        """
        raw = self._raw(_DOMAIN_STEPS, m, first_chain, n_chains)
        return np.sqrt(self.delta_t) * _to_normals(raw).T

    def initial_momenta(self, n_chains):
        """Unit-variance initial momenta from the reserved stream: (nu, n_chains)."""
        return self._normals(_DOMAIN_MOMENTA, 0, n_chains)

    def normal(self, ell, m, alpha):
        """Single standard normal for chain ``ell``, step ``m``, component ``alpha``."""
        if not 0 <= alpha < self.nu:
            raise ValueError("component index out of range")
        row = _to_normals(self._raw(_DOMAIN_STEPS, m, ell, 1))
        return float(row[0, alpha])
