from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import zipf

from sandpile import basis, build_potential, identity, rectangle
from sandpile.domain import Configuration
from sandpile import kernels
from sandpile.stochastic import (MIN_SAMPLES, alias_table, fit_power_law,
                                 run, variation_of_information)


def test_rng_matches_independent_oracle():
    # pure-python xoshiro256++ / splitmix64, kept separate from the kernel
    mask = (1 << 64) - 1

    def oracle(seed, n):
        x = seed & mask
        s = []
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & mask
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
            s.append((z ^ (z >> 31)) & mask)

        def rotl(v, k):
            return ((v << k) | (v >> (64 - k))) & mask

        out = []
        for _ in range(n):
            out.append((rotl((s[0] + s[3]) & mask, 23) + s[0]) & mask)
            t = (s[1] << 17) & mask
            s[2] ^= s[0]
            s[3] ^= s[1]
            s[1] ^= s[2]
            s[0] ^= s[3]
            s[2] ^= t
            s[3] = rotl(s[3], 45)
        return [(u >> 11) * 2.0 ** -53 for u in out]

    for seed in (0, 1, 2 ** 63 + 11):
        state = kernels.seed_state(seed)
        out = np.empty(500)
        kernels.rng_doubles(state, out)
        assert np.array_equal(out, np.array(oracle(seed, 500)))


def test_alias_table_matches_weights():
    weights = np.array([0, 3, 1, 0, 6], np.int64)
    prob, alias, vert = alias_table(weights)
    assert sorted(vert.tolist()) == [1, 2, 4]
    # reconstruct slot masses: keep-probability plus alias inflow
    mass = np.zeros(5)
    n = len(vert)
    for k in range(n):
        mass[vert[k]] += prob[k]
        mass[vert[alias[k]]] += 1.0 - prob[k]
    np.testing.assert_allclose(mass[[1, 2, 4]] / n, np.array([3, 1, 6]) / 10,
                               atol=1e-12)


def test_alias_rejects_zero_potential():
    with pytest.raises(ValueError, match="degenerate"):
        alias_table(np.zeros(4, np.int64))


def test_run_zero_potential_rejected(d15):
    p0 = build_potential(basis("0"), d15)
    with pytest.raises(ValueError, match="degenerate"):
        run(identity(d15), p0, 1, seed=1)


def test_expected_drops_proportional_to_potential(d12):
    ident = identity(d12)
    p = build_potential(basis("1a"), d12)
    assert p.flat().tolist() == [2, 7]
    chain = run(ident, p, Fraction(20000, p.total), seed=5,
                record_vertices=True)
    freq = np.bincount(chain.drop_vertices, minlength=2) / chain.steps
    np.testing.assert_allclose(freq, p.flat() / p.total, atol=0.02)


def test_time_association(d12):
    p = build_potential(basis("1a"), d12)
    chain = run(identity(d12), p, 1, seed=9,
                snapshot_times=[Fraction(1, 3), Fraction(1)])
    assert chain.steps == p.total
    times = [t for t, _ in chain.snapshots]
    assert times == [Fraction(3, 9), Fraction(9, 9)]
    assert chain.snapshots[-1][1] == chain.final


def test_reproducibility(d15):
    ident = identity(d15)
    p = build_potential(basis("2a"), d15)
    a = run(ident, p, 2, seed=77, snapshot_times=[Fraction(1)])
    b = run(ident, p, 2, seed=77, snapshot_times=[Fraction(1)])
    assert np.array_equal(a.sizes, b.sizes)
    assert a.final == b.final
    assert a.snapshots[0][1] == b.snapshots[0][1]
    c = run(ident, p, 2, seed=78)
    assert not np.array_equal(a.sizes, c.sizes)


def test_ergodicity_two_vertices(d12):
    from sandpile.group import recurrent_configurations
    ident = identity(d12)
    p = build_potential(basis("1a"), d12)
    assert (p.flat() > 0).all()
    snap_times = [Fraction(k, p.total) for k in range(1, 10 ** 4 + 1)]
    chain = run(ident, p, Fraction(10 ** 4, p.total), seed=3,
                snapshot_times=snap_times)
    seen = {tuple(cfg.flat()) for _, cfg in chain.snapshots}
    assert len(seen) == len(recurrent_configurations(d12)) == 15


def test_zero_size_avalanches_recorded(d15):
    p = build_potential(basis("1a"), d15)
    chain = run(identity(d15), p, 1, seed=4)
    assert (chain.sizes == 0).any()
    assert (chain.sizes >= 0).all()


def test_vi_identical_and_symmetry(ident63):
    assert variation_of_information(ident63, ident63) == 0.0


def test_vi_independent_random(d255, rng):
    a = Configuration(d255, rng.integers(0, 4, (255, 255)))
    b = Configuration(d255, rng.integers(0, 4, (255, 255)))
    vi = variation_of_information(a, b)
    assert abs(vi - 1.0) < 0.02


def test_vi_domain_mismatch(d15, d63):
    with pytest.raises(ValueError):
        variation_of_information(Configuration.zeros(d15),
                                 Configuration.zeros(d63))


def test_vi_constant_pair_defined():
    d = rectangle(4, 4)
    assert variation_of_information(Configuration.filled(d, 2),
                                    Configuration.filled(d, 2)) == 0.0


def test_fit_power_law_synthetic_oracle():
    sample = zipf(1.5).rvs(size=100_000, random_state=12345)
    fit = fit_power_law(sample)
    assert abs(fit.exponent - (-1.5)) < 0.05
    sample25 = zipf(2.5).rvs(size=100_000, random_state=999)
    fit25 = fit_power_law(sample25)
    assert abs(fit25.exponent - (-2.5)) < 0.08


def test_fit_power_law_fixed_xmin():
    sample = zipf(1.8, loc=0).rvs(size=50_000, random_state=1)
    fit = fit_power_law(sample, xmin=1)
    assert fit.xmin == 1
    assert abs(fit.exponent - (-1.8)) < 0.05


def test_fit_requires_enough_samples():
    with pytest.raises(ValueError):
        fit_power_law(np.arange(1, MIN_SAMPLES // 2))


def test_fit_ignores_zero_sizes():
    sample = zipf(1.6).rvs(size=20_000, random_state=3)
    padded = np.concatenate([sample, np.zeros(5_000, np.int64)])
    assert fit_power_law(padded).exponent == fit_power_law(sample).exponent
