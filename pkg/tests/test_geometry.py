import numpy as np
import pytest
from scipy import stats

from rydchain.errors import DomainError
from rydchain.geometry import (apply_disorder, geometry_rows, ordered_positions, pair_distance,
                               sample_geometry, sample_seed)
from rydchain.units import BOHR_PER_UM


def test_ordered_positions():
    np.testing.assert_array_equal(ordered_positions(3, 11.0).positions, [0, 11, 22])
    g = ordered_positions(12, 50.0)
    assert g.n_atoms == 12 and g.positions.max() == 550.0
    np.testing.assert_array_equal(ordered_positions(1, 5.0).positions, [0.0])
    np.testing.assert_allclose(g.positions_au, g.positions * BOHR_PER_UM)


def test_pair_distance():
    g = ordered_positions(4, 7.0)
    assert pair_distance(g, 0, 2) == 14.0
    with pytest.raises(DomainError):
        pair_distance(g, 1, 1)


def test_zero_disorder_is_identity():
    g = ordered_positions(6, 9.0)
    for seed in (0, 1, 12345):
        np.testing.assert_array_equal(apply_disorder(g, 0.0, seed).positions, g.positions)


def test_disorder_bounds_and_determinism():
    g = ordered_positions(10, 8.0)
    a = apply_disorder(g, 0.45, 99)
    b = apply_disorder(g, 0.45, 99)
    assert a == b
    shift = (a.positions - g.positions) / 8.0
    assert np.all(np.abs(shift) <= 0.45)
    assert apply_disorder(g, 0.45, 100) != a


def test_disorder_rejects_overlapping_range():
    with pytest.raises(DomainError):
        apply_disorder(ordered_positions(3, 5.0), 0.5, 1)


def test_disorder_is_uniform():
    # one shift per sample at a fixed site, many independent seeds
    w, d = 0.45, 1.0
    u = np.array([sample_geometry(3, d, w, 7, s).positions[1] - 1.0 for s in range(20000)])
    assert stats.kstest(u, stats.uniform(loc=-w, scale=2 * w).cdf).pvalue > 0.01


def test_sample_seeds_distinct():
    seeds = {sample_seed(2024, s) for s in range(1000)}
    assert len(seeds) == 1000


def test_geometry_rows():
    rows = list(geometry_rows([ordered_positions(2, 3.0), ordered_positions(2, 4.0)]))
    assert rows == [(0, 0, 0.0), (0, 1, 3.0), (1, 0, 0.0), (1, 1, 4.0)]
