"""Quench dynamics by spectral decomposition.

``Psi(t) = sum_i c_i exp(-i E_i t) |psi_i>`` is exact for any ``t``, so no
time stepping is involved. Times are given in natural units and converted to
atomic units with ``time_unit`` (a.u. per natural unit).
"""

from dataclasses import dataclass, field

import numpy as np

from .basis import S, parse_state, sector_violation
from .errors import DomainError, MembershipError
from .units import US_PER_AU_TIME

# complex amplitudes materialised per chunk of time points
_CHUNK_BYTES = 64 * 1024**2


def default_time_grid(t_min=1e-2, t_max=1e2, n_points=400, include_zero=True):
    """Geometric grid in natural units, optionally starting at ``t = 0``."""
    t = np.geomspace(t_min, t_max, n_points)
    return np.concatenate([[0.0], t]) if include_zero else t


@dataclass(frozen=True)
class QuenchSpec:
    initial_pattern: str
    time_grid: np.ndarray = field(default_factory=default_time_grid)
    cut: int = None

    def __post_init__(self):
        t = np.asarray(self.time_grid, dtype=float)
        if t.ndim != 1 or len(t) == 0:
            raise DomainError("time grid must be a non-empty 1-D sequence")
        if t[0] < 0:
            raise DomainError("time grid must start at t >= 0")
        if np.any(np.diff(t) <= 0):
            raise DomainError("time grid must be strictly increasing")
        object.__setattr__(self, "time_grid", t)

    def codes(self):
        return parse_state(self.initial_pattern)

    def cut_for(self, n_atoms):
        # odd chains: the left block gets the extra site
        return (n_atoms + 1) // 2 if self.cut is None else self.cut


def all_p(n_atoms):
    return "p" * n_atoms


def initial_index(basis, pattern):
    codes = parse_state(pattern) if isinstance(pattern, str) else tuple(pattern)
    if len(codes) != basis.n_atoms:
        raise MembershipError(f"initial pattern has {len(codes)} sites, chain has {basis.n_atoms}")
    why = sector_violation(codes, basis.order)
    if why is not None:
        raise MembershipError(f"initial pattern {pattern!r} is outside the sector: {why}")
    return basis.rank(codes)


def initial_overlaps(eigensystem, quench, basis):
    """Expansion coefficients ``c_i = <psi_i|Psi(0)>`` of the quench state."""
    idx = initial_index(basis, quench.initial_pattern)
    return eigensystem.eigenvectors[idx].copy()


def fidelity_series(c, eigenvalues, times, time_unit=1.0):
    """Survival probability ``|sum_i |c_i|^2 exp(-i E_i t)|^2``."""
    p = np.abs(np.asarray(c)) ** 2
    t = np.asarray(times, dtype=float) * time_unit
    E = np.asarray(eigenvalues, dtype=float)
    out = np.empty(len(t))
    step = max(1, _CHUNK_BYTES // (16 * max(len(E), 1)))
    for a in range(0, len(t), step):
        phase = np.exp(-1j * np.outer(t[a:a + step], E))
        out[a:a + step] = np.abs(phase @ p) ** 2
    return np.clip(out, 0.0, 1.0)


def evolve_state(eigensystem, c, t, time_unit=1.0):
    """Amplitudes of ``Psi(t)`` in the sector basis (``t`` scalar)."""
    E = eigensystem.eigenvalues
    return eigensystem.eigenvectors @ (np.asarray(c) * np.exp(-1j * E * t * time_unit))


def _amplitude_chunks(eigensystem, c, times, time_unit):
    E = eigensystem.eigenvalues
    V = eigensystem.eigenvectors
    t = np.asarray(times, dtype=float) * time_unit
    step = max(1, _CHUNK_BYTES // (16 * len(E)))
    for a in range(0, len(t), step):
        coeff = c[:, None] * np.exp(-1j * np.outer(E, t[a:a + step]))
        yield a, V @ coeff  # (dim, chunk)


def s_fraction_series(eigensystem, c, basis, times, time_unit=1.0):
    """Fraction of atoms in ``s`` as a function of time."""
    weight = np.count_nonzero(basis.states == S, axis=1) / basis.n_atoms
    out = np.empty(len(times))
    for a, psi in _amplitude_chunks(eigensystem, c, times, time_unit):
        out[a:a + psi.shape[1]] = weight @ (np.abs(psi) ** 2)
    return out


def norm_series(eigensystem, c, times, time_unit=1.0):
    out = np.empty(len(times))
    for a, psi in _amplitude_chunks(eigensystem, c, times, time_unit):
        out[a:a + psi.shape[1]] = np.linalg.norm(psi, axis=0)
    return out


@dataclass(frozen=True)
class Bipartition:
    """Map from basis states to (left block, right block) configurations."""

    cut: int
    left: np.ndarray
    right: np.ndarray
    n_left: int
    n_right: int

    @property
    def max_entropy(self):
        return float(np.log(min(self.n_left, self.n_right)))


def bipartition(basis, cut):
    if not 0 < cut < basis.n_atoms:
        raise DomainError(f"cut must satisfy 0 < cut < {basis.n_atoms}, got {cut}")
    _, left = np.unique(basis.states[:, :cut], axis=0, return_inverse=True)
    _, right = np.unique(basis.states[:, cut:], axis=0, return_inverse=True)
    left, right = left.ravel(), right.ravel()
    return Bipartition(cut, left, right, int(left.max()) + 1, int(right.max()) + 1)


def entanglement_entropy(psi, part):
    """Von Neumann entropy of the left block for one or more states.

    ``psi`` is ``(dim,)`` or ``(dim, k)``; returns a scalar or ``(k,)``.
    """
    single = psi.ndim == 1
    if single:
        psi = psi[:, None]
    k = psi.shape[1]
    A = np.zeros((k, part.n_left, part.n_right), dtype=complex)
    A[:, part.left, part.right] = psi.T
    sv = np.linalg.svd(A, compute_uv=False)
    lam = sv ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 1e-300, -lam * np.log(lam), 0.0)
    S_ = np.maximum(terms.sum(axis=1), 0.0)
    return float(S_[0]) if single else S_


def entanglement_entropy_series(eigensystem, c, basis, cut, times, time_unit=1.0):
    """Half-chain entanglement entropy ``S(t)``.

    Returns ``(raw, normalized)`` where ``normalized = raw / ln(D_A)`` and
    ``D_A`` counts the left-block configurations occurring in the sector.
    """
    part = bipartition(basis, cut)
    raw = np.empty(len(times))
    for a, psi in _amplitude_chunks(eigensystem, c, times, time_unit):
        raw[a:a + psi.shape[1]] = entanglement_entropy(psi, part)
    norm = np.log(part.n_left) if part.n_left > 1 else 1.0
    return raw, raw / norm


@dataclass
class ObservableSeries:
    times: np.ndarray
    time_unit: float
    fidelity: np.ndarray
    s_fraction: np.ndarray
    saturation: float
    ee_raw: np.ndarray
    ee_normalized: np.ndarray
    t_heisenberg: float = np.inf

    @property
    def times_us(self):
        return self.times * self.time_unit * US_PER_AU_TIME

    @property
    def s_over_saturation(self):
        return self.s_fraction / self.saturation

    @property
    def ee_over_max(self):
        m = np.max(self.ee_raw)
        return self.ee_raw / m if m > 0 else self.ee_raw.copy()

    def columns(self):
        return {
            "t_natural": self.times,
            "t_us": self.times_us,
            "fidelity": self.fidelity,
            "s_fraction": self.s_fraction,
            "s_over_saturation": self.s_over_saturation,
            "ee_raw": self.ee_raw,
            "ee_normalized": self.ee_normalized,
        }


def quench_series(eigensystem, basis, quench, time_unit, saturation, t_heisenberg=np.inf,
                  metrics=("fidelity", "s_fraction", "ee")):
    """All time series for one quench; skipped metrics are filled with NaN."""
    c = initial_overlaps(eigensystem, quench, basis)
    t = quench.time_grid
    nan = np.full(len(t), np.nan)
    F = fidelity_series(c, eigensystem.eigenvalues, t, time_unit) if "fidelity" in metrics else nan
    need_states = "s_fraction" in metrics or "ee" in metrics
    s = nan.copy()
    ee = nan.copy()
    ee_n = nan.copy()
    if need_states:
        weight = np.count_nonzero(basis.states == S, axis=1) / basis.n_atoms
        part = bipartition(basis, quench.cut_for(basis.n_atoms)) if "ee" in metrics else None
        for a, psi in _amplitude_chunks(eigensystem, c, t, time_unit):
            sl = slice(a, a + psi.shape[1])
            if "s_fraction" in metrics:
                s[sl] = weight @ (np.abs(psi) ** 2)
            if part is not None:
                ee[sl] = entanglement_entropy(psi, part)
        if part is not None:
            ee_n = ee / (np.log(part.n_left) if part.n_left > 1 else 1.0)
    return ObservableSeries(t, time_unit, F, s, saturation, ee, ee_n, t_heisenberg)
