import numpy as np

from charlearn.noise import NoiseBank, derive_seed


def test_deterministic_across_instances():
    a = NoiseBank(seed=42, nu=5, delta_t=0.2)
    b = NoiseBank(seed=42, nu=5, delta_t=0.2)
    np.testing.assert_array_equal(a.increments(3, 10), b.increments(3, 10))
    np.testing.assert_array_equal(a.initial_momenta(10), b.initial_momenta(10))


def test_distinct_seeds_differ():
    a = NoiseBank(seed=1, nu=4, delta_t=0.1)
    b = NoiseBank(seed=2, nu=4, delta_t=0.1)
    assert not np.array_equal(a.increments(0, 6), b.increments(0, 6))


def test_pointwise_lookup_matches_block():
    bank = NoiseBank(seed=7, nu=6, delta_t=0.3)
    block = bank.increments(4, 9)
    scale = np.sqrt(0.3)
    for ell in (0, 3, 8):
        for alpha in (0, 1, 5):
            assert block[alpha, ell] == scale * bank.normal(ell, 4, alpha)


def test_chain_values_independent_of_chain_count():
    bank = NoiseBank(seed=11, nu=3, delta_t=0.25)
    small = bank.increments(2, 5)
    large = bank.increments(2, 64)
    np.testing.assert_array_equal(large[:, :5], small)


def test_block_offset_consistency():
    bank = NoiseBank(seed=13, nu=3, delta_t=0.25)
    full = bank.increments(1, 20)
    tail = bank.increments(1, 8, first_chain=12)
    np.testing.assert_array_equal(full[:, 12:], tail)


def test_steps_and_momenta_streams_disjoint():
    bank = NoiseBank(seed=3, nu=4, delta_t=1.0)
    steps = bank.increments(0, 16)
    momenta = bank.initial_momenta(16)
    assert not np.array_equal(steps, momenta)


def test_moments_scale_with_sqrt_dt():
    bank = NoiseBank(seed=5, nu=2, delta_t=0.49)
    values = np.concatenate([bank.increments(m, 4000).ravel() for m in range(4)])
    assert abs(values.mean()) < 0.01
    assert abs(values.std() - 0.7) < 0.01


def test_initial_momenta_standard_normal():
    bank = NoiseBank(seed=9, nu=50, delta_t=0.2)
    v = bank.initial_momenta(2000).ravel()
    assert abs(v.mean()) < 0.01
    assert abs(v.std() - 1.0) < 0.01


def test_derive_seed_is_stable_and_label_sensitive():
    assert derive_seed(123, "chains") == derive_seed(123, "chains")
    assert derive_seed(123, "chains") != derive_seed(123, "targets")
    assert derive_seed(123, "chains") != derive_seed(124, "chains")
    assert 0 <= derive_seed(99, "x") < 2**64
