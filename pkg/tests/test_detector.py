import logging

import numpy as np
import pytest

from sicode import oracles
from sicode.channel import ChannelParams, ReceivedPool, transmit_ids
from sicode.detector import DriftLattice, compute_dmax, detect_column_set, detect_columns, forward_backward


def test_compute_dmax():
    assert compute_dmax(100, 0.0, 0.0) == 0
    prm = ChannelParams.from_ids(0.1)
    expected = int(np.ceil(abs(100 * (prm.p_i - prm.p_d))
                           + 5 * np.sqrt(100 * (prm.p_i + prm.p_d - (prm.p_i - prm.p_d) ** 2))))
    assert compute_dmax(100, prm.p_i, prm.p_d) == expected
    assert compute_dmax(1, 1e-6, 0.0) >= 1


def test_lattice_validation():
    with pytest.raises(ValueError):
        DriftLattice(-1, 0.1, 0.1, 0.1)
    with pytest.raises(ValueError):
        DriftLattice(2, 0.6, 0.6, 0.0)


def test_transition_rows_sum_to_one():
    lat = DriftLattice(3, 0.1, 0.2, 0.05)
    tm = lat.transition_matrix()
    assert tm.shape == (7, 7)
    assert np.allclose(tm.sum(axis=1), 1.0)
    assert lat.states.tolist() == list(range(-3, 4))


def test_emission_values():
    lat = DriftLattice(1, 0.0, 0.0, 0.3)
    assert lat.emission(2, 2) == pytest.approx(0.7)
    assert lat.emission(1, 2) == pytest.approx(0.1)


def test_noiseless_is_point_mass(rng):
    x = rng.integers(0, 4, 20)
    gamma = forward_backward(x, np.full((20, 4), 0.25), DriftLattice(0, 0.0, 0.0, 0.0))
    assert np.array_equal(gamma.argmax(axis=1), x)
    assert np.allclose(gamma.max(axis=1), 1.0)


def test_substitution_only_likelihoods(rng):
    x = rng.integers(0, 4, 10)
    gamma = forward_backward(x, np.full((10, 4), 0.25), DriftLattice(0, 0.0, 0.0, 0.2))
    assert np.allclose(gamma[np.arange(10), x], 0.8)


@pytest.mark.parametrize("seed", range(10))
def test_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    d_max = int(rng.integers(1, 3))
    prm = ChannelParams.from_ids(0.2)
    y = rng.integers(0, 4, n + int(rng.integers(-d_max, d_max + 1)))
    priors = rng.dirichlet(np.ones(4), size=n)
    got = forward_backward(y, priors, DriftLattice(d_max, prm.p_i, prm.p_d, prm.p_s))
    ref = oracles.enumerate_likelihoods(y, priors, d_max, prm.p_i, prm.p_d, prm.p_s)
    assert np.allclose(got, ref, rtol=1e-9, atol=0)


def test_output_is_extrinsic(rng):
    n = 8
    y = rng.integers(0, 4, n)
    lat = DriftLattice(2, 0.02, 0.05, 0.05)
    priors = rng.dirichlet(np.ones(4), size=n)
    a = forward_backward(y, priors, lat)
    priors2 = priors.copy()
    priors2[3] = [0.97, 0.01, 0.01, 0.01]
    b = forward_backward(y, priors2, lat)
    assert np.allclose(a[3], b[3], rtol=1e-12)
    assert np.allclose(a.sum(axis=1), 1.0)


def test_sync_recovered_after_deletion(rng):
    n = 60
    x = rng.integers(0, 4, n)
    y = np.delete(x, 30)
    prm = ChannelParams.from_ids(0.05)
    lat = DriftLattice.for_channel(n, prm)
    priors = np.full((n, 4), 0.25)
    priors[::5] = np.eye(4)[x[::5]]  # every fifth base is a marker
    gamma = forward_backward(y, priors, lat)
    hits = gamma.argmax(axis=1) == x
    assert hits[:25].mean() > 0.9 and hits[36:].mean() > 0.9


def test_short_column_treated_as_erased(caplog):
    lat = DriftLattice(1, 0.05, 0.05, 0.05)
    with caplog.at_level(logging.WARNING):
        gamma = forward_backward(np.zeros(5, np.int8), np.full((10, 4), 0.25), lat)
    assert np.allclose(gamma, 0.25)
    assert "erased" in caplog.text


def test_long_column_truncated(caplog, rng):
    lat = DriftLattice(1, 0.05, 0.05, 0.05)
    with caplog.at_level(logging.WARNING):
        gamma = forward_backward(rng.integers(0, 4, 15), np.full((10, 4), 0.25), lat)
    assert np.isfinite(gamma).all() and np.allclose(gamma.sum(axis=1), 1.0)
    assert "truncat" in caplog.text


def test_impossible_column_is_uniform(caplog):
    # no substitutions and a point-mass prior that contradicts the only alignment
    lat = DriftLattice(0, 0.0, 0.0, 0.0)
    priors = np.tile(np.eye(4)[0], (4, 1))
    with caplog.at_level(logging.WARNING):
        gamma = forward_backward(np.array([1, 1, 1, 1]), priors, lat)
    assert np.allclose(gamma, 0.25)


def test_batch_matches_single_and_erasures(rng):
    n = 12
    prm = ChannelParams.from_ids(0.1)
    lat = DriftLattice.for_channel(n, prm)
    xs = rng.integers(0, 4, (n, 5))
    cols = [transmit_ids(xs[:, j], prm, rng) for j in range(5)]
    cols[2] = None
    priors = rng.dirichlet(np.ones(4), size=(5, n))
    batch = detect_columns(cols, priors, lat)
    assert np.allclose(batch[2], 0.25)
    for j in (0, 1, 3, 4):
        assert np.allclose(batch[j], forward_backward(cols[j], priors[j], lat), rtol=1e-13)
    pool = ReceivedPool(cols, n)
    sub = detect_column_set(pool, [4, 2], priors[[4, 2]], lat)
    assert np.allclose(sub, batch[[4, 2]])
