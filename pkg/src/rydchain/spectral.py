"""Exact diagonalization and spectrum-derived diagnostics."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import curve_fit

from .errors import DomainError, SolverError
from .units import US_PER_AU_TIME


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Full spectrum of a sector Hamiltonian.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``; ``overlaps[i]`` is
    ``|<psi_i|Psi(0)>|**2`` for the basis state ``initial_index``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    initial_index: int = 0

    @property
    def dim(self):
        return len(self.eigenvalues)

    @property
    def coefficients(self):
        return self.eigenvectors[self.initial_index]

    @property
    def overlaps(self):
        return self.coefficients ** 2

    def with_initial(self, index):
        return EigenSystem(self.eigenvalues, self.eigenvectors, int(index))

    def residuals(self, H, indices=None):
        """``||H v_i - E_i v_i||`` for the requested eigenpairs."""
        m = getattr(H, "matrix", H)
        idx = np.arange(self.dim) if indices is None else np.asarray(indices)
        V = self.eigenvectors[:, idx]
        return np.linalg.norm(m @ V - V * self.eigenvalues[idx], axis=0)


def _fix_signs(V):
    # largest-magnitude component of every eigenvector made positive
    rows = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[rows, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    V *= signs


def diagonalize(H, initial_index=0):
    """Full dense symmetric eigendecomposition (LAPACK divide and conquer)."""
    m = getattr(H, "matrix", H)
    try:
        E, V = scipy.linalg.eigh(m, driver="evd", check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        prov = getattr(H, "provenance", {})
        raise SolverError(f"eigensolver failed for matrix of dimension {m.shape[0]} "
                          f"(provenance {prov}): {exc}") from exc
    _fix_signs(V)
    return EigenSystem(E, V, int(initial_index))


@dataclass(frozen=True)
class SpacingStats:
    mean_r: float
    ratios: np.ndarray
    histogram: np.ndarray
    bin_edges: np.ndarray
    n_degenerate: int
    trim_fraction: float


def gap_ratios(eigenvalues, rel_tol=1e-12):
    """Consecutive gap ratios ``min(d_n, d_{n-1}) / max(d_n, d_{n-1})``.

    Gaps below ``rel_tol`` times the spectral span count as zero. A pair of
    zero gaps gives ``r = 1``; the number of such pairs is also returned.
    """
    E = np.sort(np.asarray(eigenvalues, dtype=float))
    gaps = np.diff(E)
    span = E[-1] - E[0] if len(E) > 1 else 0.0
    gaps = np.where(gaps <= rel_tol * span, 0.0, gaps)
    lo = np.minimum(gaps[1:], gaps[:-1])
    hi = np.maximum(gaps[1:], gaps[:-1])
    both_zero = hi == 0.0
    r = np.divide(lo, hi, out=np.ones_like(lo), where=~both_zero)
    return r, int(both_zero.sum())


def level_spacing_ratio(eigenvalues, trim_fraction=0.1, bins=50):
    """Mean gap ratio after dropping ``trim_fraction`` of levels at each edge."""
    E = np.sort(np.asarray(eigenvalues, dtype=float))
    cut = int(np.floor(trim_fraction * len(E)))
    kept = E[cut:len(E) - cut]
    if len(kept) < 3:
        raise DomainError(f"need at least 3 levels after trimming, have {len(kept)}")
    r, n_deg = gap_ratios(kept)
    hist, edges = np.histogram(r, bins=bins, range=(0.0, 1.0), density=True)
    return SpacingStats(float(r.mean()), r, hist, edges, n_deg, trim_fraction)


def heisenberg_time(eigenvalues, time_unit=None):
    """``2*pi / mean level spacing``.

    Returns ``(t_au, t_natural, t_us)``; ``t_natural`` is None unless the
    natural time unit (a.u.) is given. A fully degenerate spectrum gives inf.
    """
    E = np.asarray(eigenvalues, dtype=float)
    if len(E) < 2:
        raise DomainError("Heisenberg time needs at least two levels")
    spacing = (E.max() - E.min()) / (len(E) - 1)
    t_au = np.inf if spacing == 0 else 2 * np.pi / spacing
    t_nat = None if time_unit is None else t_au / time_unit
    return t_au, t_nat, t_au * US_PER_AU_TIME


@dataclass(frozen=True)
class LDOS:
    bin_edges: np.ndarray
    mass: np.ndarray
    energies: np.ndarray
    overlaps: np.ndarray

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self):
        return np.diff(self.bin_edges)


def ldos(eigensystem, n_bins=60, energy_range=None):
    """Initial-state overlap binned by energy, plus the raw scatter."""
    if n_bins < 2:
        raise DomainError(f"need at least 2 bins, got {n_bins}")
    E = eigensystem.eigenvalues
    w = eigensystem.overlaps
    if energy_range is None:
        lo, hi = E.min(), E.max()
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        energy_range = (lo, hi)
    # explicit edges so that re-binning the scatter reproduces the histogram exactly
    edges = np.histogram_bin_edges(E, bins=n_bins, range=energy_range)
    mass, _ = np.histogram(E, bins=edges, weights=w)
    return LDOS(edges, mass, E.copy(), w.copy())


@dataclass(frozen=True)
class GaussianFit:
    mean: float
    width: float
    amplitude: float
    r_squared: float

    @property
    def sparse(self):
        return self.r_squared < 0.5


def _gauss(x, a, m, s):
    return a * np.exp(-0.5 * ((x - m) / s) ** 2)


def gaussian_fit(binned):
    """Least-squares Gaussian through the LDOS histogram (mass per unit energy)."""
    x = binned.centers
    y = binned.mass / binned.widths
    if np.count_nonzero(binned.mass > 0) < 5:
        raise DomainError("Gaussian fit needs at least 5 nonempty bins")
    m0 = np.average(x, weights=binned.mass)
    s0 = np.sqrt(np.average((x - m0) ** 2, weights=binned.mass)) or binned.widths[0]
    try:
        (a, m, s), _ = curve_fit(_gauss, x, y, p0=(y.max(), m0, s0), maxfev=20000)
    except RuntimeError as exc:
        raise DomainError(f"Gaussian fit did not converge: {exc}") from exc
    resid = y - _gauss(x, a, m, s)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 0.0
    return GaussianFit(float(m), float(abs(s)), float(a), float(r2))


def detect_scar_candidates(eigensystem, window_width=None, threshold=100.0, floor=1e-14):
    """Indices of eigenstates with atypically high initial-state overlap.

    A state is flagged when its overlap exceeds ``threshold`` times the
    median overlap of the eigenstates within ``window_width / 2`` in energy
    (default window: spectral span / 50). Overlaps at or below ``floor`` are
    symmetry zeros (eigenstates of the other reflection parity); they are
    left out of the medians and never flagged.
    """
    E = eigensystem.eigenvalues
    w = eigensystem.overlaps
    if window_width is None:
        window_width = (E.max() - E.min()) / 50.0
    live = w > floor
    El, wl = E[live], w[live]
    lo = np.searchsorted(El, El - window_width / 2, side="left")
    hi = np.searchsorted(El, El + window_width / 2, side="right")
    idx = np.flatnonzero(live)
    flagged = [idx[i] for i in range(len(El)) if wl[i] > threshold * np.median(wl[lo[i]:hi[i]])]
    return np.array(flagged, dtype=int)


def scar_concentration(eigensystem, flagged, band=0.05):
    """Share of the flagged overlap weight within ``band`` of the span around
    the spectral midpoint."""
    E = eigensystem.eigenvalues
    w = eigensystem.overlaps[np.asarray(flagged, dtype=int)]
    if w.size == 0 or w.sum() == 0:
        return 0.0
    mid = 0.5 * (E.max() + E.min())
    near = np.abs(E[np.asarray(flagged, dtype=int)] - mid) <= band * (E.max() - E.min())
    return float(w[near].sum() / w.sum())
