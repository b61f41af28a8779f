"""Ordered and position-disordered one-dimensional atom chains.

Positions are kept in micrometers; :attr:`ChainGeometry.positions_au` gives
them in Bohr radii for the coupling formulas.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .units import BOHR_PER_UM

DEFAULT_DISORDERS = (0.05, 0.15, 0.25, 0.35, 0.45)
DEFAULT_SPACINGS = {
    2: (32.0, 50.0),
    3: (7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0),
    4: (4.0, 5.0, 6.0, 7.0, 8.0),
}


@dataclass(frozen=True, eq=False)
class ChainGeometry:
    n_atoms: int
    spacing_d: float
    disorder_w: float
    positions: np.ndarray
    seed: int = None

    @property
    def positions_au(self):
        return self.positions * BOHR_PER_UM

    def distance_matrix(self, atomic_units=True):
        x = self.positions_au if atomic_units else self.positions
        return np.abs(x[:, None] - x[None, :])

    def __eq__(self, other):
        if not isinstance(other, ChainGeometry):
            return NotImplemented
        return (self.n_atoms == other.n_atoms and self.spacing_d == other.spacing_d
                and self.disorder_w == other.disorder_w and self.seed == other.seed
                and np.array_equal(self.positions, other.positions))


def ordered_positions(n_atoms, spacing_d):
    """Evenly spaced chain ``x_i = i * d`` (micrometers)."""
    if n_atoms < 1:
        raise DomainError(f"n_atoms must be >= 1, got {n_atoms}")
    if not spacing_d > 0:
        raise DomainError(f"spacing must be positive, got {spacing_d}")
    positions = np.arange(n_atoms, dtype=float) * float(spacing_d)
    return ChainGeometry(n_atoms, float(spacing_d), 0.0, positions)


def sample_seed(base_seed, sample):
    """Stream seed for ensemble sample ``sample``."""
    return (int(base_seed) ^ (int(sample) + 1)) & 0xFFFFFFFFFFFFFFFF


def disorder_rng(seed):
    # Philox is counter based: the stream for a given key is platform independent
    return np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF))


def apply_disorder(geometry, disorder_w, seed):
    """Shift atom ``i`` by ``u_i * d`` with ``u_i`` uniform on ``[-w, w]``.

    Shifts are applied to the nominal lattice sites, not to the (possibly
    already disordered) positions of ``geometry``.
    """
    w = float(disorder_w)
    if not 0.0 <= w < 0.5:
        raise DomainError(f"disorder w must satisfy 0 <= w < 0.5, got {w}")
    n, d = geometry.n_atoms, geometry.spacing_d
    nominal = np.arange(n, dtype=float) * d
    if w == 0.0:
        return ChainGeometry(n, d, 0.0, nominal, seed)
    u = disorder_rng(seed).uniform(-w, w, size=n)
    return ChainGeometry(n, d, w, nominal + u * d, seed)


def sample_geometry(n_atoms, spacing_d, disorder_w, base_seed, sample):
    """Geometry of ensemble member ``sample``."""
    chain = ordered_positions(n_atoms, spacing_d)
    return apply_disorder(chain, disorder_w, sample_seed(base_seed, sample))


def pair_distance(geometry, i, j):
    """Distance between atoms ``i`` and ``j`` in micrometers."""
    if i == j:
        raise DomainError("pair distance needs two distinct atoms")
    x = geometry.positions
    return abs(float(x[i]) - float(x[j]))


def geometry_rows(geometries):
    """Rows ``(sample, atom, position_um)`` for a CSV dump."""
    for s, g in enumerate(geometries):
        for i, x in enumerate(g.positions):
            yield s, i, float(x)


def with_positions(geometry, positions):
    return replace(geometry, positions=np.asarray(positions, dtype=float))
