"""Dense effective Hamiltonian on the resonant sector.

Every sector state has the same bare Stark energy at the N-body resonance,
so the diagonal is identically zero and only couplings appear:

* hopping: two atoms in different levels swap them (``p-s``, ``p-s'`` or
  ``s-s'`` exchange, element ``d1*d2/R**3``);
* field-tuned: a group of ``order`` atoms all in ``p`` converts to one ``s``
  and ``order - 1`` ``s'`` atoms (and back).
"""

import struct
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .basis import P, S, SP, site_shift
from .couplings import HOP_PS, HOP_PSP, HOP_SSP, field_tuned_table, inverse_cubes
from .errors import ConfigurationError, ResourceError
from .units import DEFAULT_MEMORY_BUDGET

# label pair (unordered) -> hopping kind
_PAIR_KIND = {
    frozenset((P, S)): HOP_PS,
    frozenset((P, SP)): HOP_PSP,
    frozenset((S, SP)): HOP_SSP,
}

MAGIC = b"SECH"


@dataclass(frozen=True, eq=False)
class SectorHamiltonian:
    matrix: np.ndarray
    order: int
    n_atoms: int
    provenance: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def is_symmetric(self):
        return bool(np.array_equal(self.matrix, self.matrix.T))

    def frobenius_norm(self):
        return float(np.linalg.norm(self.matrix))

    def to_bytes(self):
        """Binary dump: ``SECH``, u32 dimension, u32 order, u32 zero pad, then
        row-major little-endian float64 entries."""
        header = MAGIC + struct.pack("<III", self.dim, self.order, 0)
        return header + np.ascontiguousarray(self.matrix, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob):
        if blob[:4] != MAGIC:
            raise ConfigurationError("not a sector Hamiltonian dump (bad magic)")
        dim, order, _ = struct.unpack("<III", blob[4:16])
        m = np.frombuffer(blob[16:], dtype="<f8")
        if m.size != dim * dim:
            raise ConfigurationError(f"dump truncated: expected {dim * dim} entries, got {m.size}")
        return cls(m.reshape(dim, dim).astype(float), order, n_atoms=-1)


def dense_bytes(dim):
    return 8 * dim * dim


def _check_budget(dim, memory_budget):
    need = dense_bytes(dim)
    if need > memory_budget:
        raise ResourceError(
            f"dense Hamiltonian of dimension {dim} needs {need} bytes "
            f"({need / 1024**3:.1f} GiB), budget is {memory_budget} bytes")


def _hop_entries(basis, positions_au, constants):
    """Yield ``(rows, cols, values, kind)`` for all hopping processes."""
    states = basis.states
    keys = basis.keys
    n = basis.n_atoms
    inv3 = inverse_cubes(positions_au)
    for i in range(n):
        for j in range(i + 1, n):
            a = states[:, i].astype(np.int64)
            b = states[:, j].astype(np.int64)
            movable = a != b
            if not movable.any():
                continue
            rows = np.flatnonzero(movable)
            a, b = a[rows], b[rows]
            si, sj = site_shift(n, i), site_shift(n, j)
            new = keys[rows] + ((b - a) << si) + ((a - b) << sj)
            cols = basis.lookup(new)
            assert (cols >= 0).all(), "hopping left the sector"
            # split by kind; one kind per label pair
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            for (la, lb), kind in (((P, S), HOP_PS), ((P, SP), HOP_PSP), ((S, SP), HOP_SSP)):
                sel = (lo == la) & (hi == lb)
                strength = constants.hop_strength(kind)
                if strength == 0.0 or not sel.any():
                    continue
                yield rows[sel], cols[sel], strength * inv3[i, j], kind


def _field_entries(basis, positions_au, constants, order):
    """Yield ``(rows, cols, value)`` for forward conversions p..p -> s s'..s'."""
    states = basis.states
    keys = basis.keys
    n = basis.n_atoms
    groups, s_sites, values = field_tuned_table(order, positions_au, constants)
    all_p_cache = {}
    for group, s, v in zip(groups, s_sites, values):
        g = tuple(int(a) for a in group)
        if g not in all_p_cache:
            all_p_cache[g] = np.flatnonzero((states[:, list(g)] == P).all(axis=1))
        rows = all_p_cache[g]
        if rows.size == 0:
            continue
        delta_key = 0
        for a in g:
            delta_key += (S if a == s else SP) << site_shift(n, a)
        cols = basis.lookup(keys[rows] + delta_key)
        assert (cols >= 0).all(), "field-tuned process left the sector"
        yield rows, cols, float(v)


def assemble(basis, geometry, constants, order=None, memory_budget=DEFAULT_MEMORY_BUDGET):
    """Assemble the dense sector Hamiltonian.

    Parameters
    ----------
    basis : SectorBasis
    geometry : ChainGeometry or array_like
        Atom positions; a bare array is taken to be in Bohr radii.
    constants : CouplingConstants
    order : int, optional
        Defaults to ``basis.order``; must agree with it.
    """
    order = basis.order if order is None else order
    if order != basis.order:
        raise ConfigurationError(f"basis is order {basis.order}, requested order {order}")
    if hasattr(geometry, "positions_au"):
        x = geometry.positions_au
    else:
        x = np.asarray(geometry, dtype=float)
    if len(x) != basis.n_atoms:
        raise ConfigurationError(
            f"geometry has {len(x)} atoms but basis has {basis.n_atoms}")
    _check_budget(basis.dim, memory_budget)

    H = np.zeros((basis.dim, basis.dim))
    for rows, cols, v, _ in _hop_entries(basis, x, constants):
        H[rows, cols] += v
    for rows, cols, v in _field_entries(basis, x, constants, order):
        H[rows, cols] += v
        H[cols, rows] += v

    provenance = {
        "order": order,
        "n_atoms": basis.n_atoms,
        "constants": constants.to_dict(),
    }
    if hasattr(geometry, "positions"):
        provenance.update(spacing_um=geometry.spacing_d, disorder_w=geometry.disorder_w,
                          seed=geometry.seed, positions_um=[float(p) for p in geometry.positions])
    return SectorHamiltonian(H, order, basis.n_atoms, provenance)


def row_sparsity_report(H, basis=None, geometry=None, constants=None):
    """Nonzeros per row and, when the model inputs are given, a histogram of
    coupling types (``p-s``, ``p-s'``, ``s-s'``, ``field``)."""
    m = H.matrix if isinstance(H, SectorHamiltonian) else np.asarray(H)
    nnz = np.count_nonzero(m, axis=1)
    report = {
        "dim": int(m.shape[0]),
        "nonzeros_per_row": nnz,
        "total_nonzeros": int(nnz.sum()),
        "row_count_histogram": dict(sorted(Counter(nnz.tolist()).items())),
    }
    if basis is not None and geometry is not None and constants is not None:
        x = geometry.positions_au if hasattr(geometry, "positions_au") else np.asarray(geometry)
        kinds = Counter()
        for rows, _, _, kind in _hop_entries(basis, x, constants):
            kinds[kind] += len(rows)
        for rows, _, _ in _field_entries(basis, x, constants, basis.order):
            kinds["field"] += 2 * len(rows)
        report["coupling_types"] = dict(kinds)
    return report
