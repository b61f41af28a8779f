"""Thermalization diagnostics on fidelity and entanglement time series.

The long-time decay ``F(t) ~ t**-gamma`` classifies the dynamics:
``gamma >= 2`` delocalized, ``1 <= gamma < 2`` intermediate and
``gamma < 1`` nonergodic. Series whose fidelity collapses to zero and stays
there are classified delocalized without a fit.
"""

import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from .basis import enumerate_sector
from .couplings import CouplingConstants, natural_time_unit
from .errors import DomainError
from .geometry import ordered_positions
from .hamiltonian import assemble
from .spectral import diagonalize
from .dynamics import fidelity_series

DELOCALIZED = "delocalized"
INTERMEDIATE = "intermediate"
NONERGODIC = "nonergodic"
NOT_APPLICABLE = "not-applicable"

FASTER_THAN_LOG = "faster-than-logarithmic"
LOG_OR_SLOWER = "logarithmic-or-slower"


def _loglog(times, F):
    t = np.asarray(times, dtype=float)
    F = np.asarray(F, dtype=float)
    ok = (t > 0) & (F > 0)
    return t[ok], np.log(t[ok]), np.log(F[ok])


def local_slopes(times, F, half_width=0.1):
    """Local ``d ln F / d ln t`` on the positive part of the series.

    Each slope is a least-squares fit over ``+-half_width`` decades around
    the point, which suppresses sampling noise in ensemble averages.
    """
    t, lt, lf = _loglog(times, F)
    if len(t) < 3:
        return t, np.zeros(len(t))
    h = half_width * np.log(10)
    lo = np.searchsorted(lt, lt - h, side="left")
    hi = np.searchsorted(lt, lt + h, side="right")
    # windowed sums for the regression slope
    c = np.concatenate([[0.0], np.cumsum(lt)])
    cy = np.concatenate([[0.0], np.cumsum(lf)])
    cxx = np.concatenate([[0.0], np.cumsum(lt * lt)])
    cxy = np.concatenate([[0.0], np.cumsum(lt * lf)])
    n = hi - lo
    sx, sy = c[hi] - c[lo], cy[hi] - cy[lo]
    sxx, sxy = cxx[hi] - cxx[lo], cxy[hi] - cxy[lo]
    den = n * sxx - sx * sx
    with np.errstate(invalid="ignore", divide="ignore"):
        slope = np.where(den > 0, (n * sxy - sx * sy) / den, np.nan)
    fallback = np.gradient(lf, lt)
    return t, np.where(np.isfinite(slope), slope, fallback)


def detect_collapse(times, F, departure=0.9, tolerance=0.2, span_decades=0.5):
    """End of the initial exponential collapse of ``F``.

    The collapse ends at the earliest time (with ``F`` already below
    ``departure``) from which the local log-log slope stays within
    ``tolerance`` of its value for the following half decade. If the slope
    never settles, the first time ``F < exp(-2)`` is used. Returns None when
    ``F`` never leaves the neighbourhood of 1 or neither rule applies.
    """
    times = np.asarray(times, dtype=float)
    F = np.asarray(F, dtype=float)
    if not np.any(F < departure):
        return None
    t, slope = local_slopes(times, F)
    Ft = np.interp(t, times, F)
    factor = 10 ** span_decades
    for i in range(len(t)):
        if Ft[i] >= departure:
            continue
        if t[i] * factor > t[-1]:
            break
        seg = (t >= t[i]) & (t <= t[i] * factor)
        if np.max(np.abs(slope[seg] - slope[i])) < tolerance:
            return float(t[i])
    below = np.flatnonzero(F < np.exp(-2))
    return float(times[below[0]]) if below.size else None


def is_rapid_collapse(times, F, collapse_time, level=0.02, factor=5.0):
    """True when ``F < level`` everywhere beyond ``factor * collapse_time``."""
    if collapse_time is None:
        return False
    times = np.asarray(times)
    late = times > factor * collapse_time
    return bool(late.any() and np.all(np.asarray(F)[late] < level))


@dataclass
class DecayFit:
    gamma: float
    fit_window: tuple
    residual: float
    collapse_time: float
    classification: str
    n_points: int = 0
    n_excluded: int = 0
    slope: float = float("nan")
    rapid_collapse: bool = False
    window_rule: str = "explicit"

    def to_dict(self):
        d = asdict(self)
        d["fit_window"] = None if self.fit_window is None else list(self.fit_window)
        return d


def classify(gamma=None, rapid_collapse=False):
    """Phase label from a decay exponent (or the rapid-collapse flag)."""
    if rapid_collapse:
        return DELOCALIZED
    if gamma is None or not np.isfinite(gamma):
        return NOT_APPLICABLE
    if gamma >= 2:
        return DELOCALIZED
    if gamma >= 1:
        return INTERMEDIATE
    return NONERGODIC


def fit_power_law(times, F, t_start, t_end, min_points=20):
    """Least-squares line through ``(ln t, ln F)`` on ``[t_start, t_end]``.

    Returns ``(slope, intercept, rms_residual, n_used, n_excluded)``.
    """
    times = np.asarray(times, dtype=float)
    F = np.asarray(F, dtype=float)
    if not 0 < t_start < t_end:
        raise DomainError(f"invalid fit window ({t_start}, {t_end})")
    inside = (times >= t_start) & (times <= t_end)
    good = inside & (F > 0)
    n_excluded = int(np.count_nonzero(inside & ~good))
    n = int(np.count_nonzero(good))
    if n < min_points:
        raise DomainError(f"fit window ({t_start:.3g}, {t_end:.3g}) holds {n} usable points, "
                          f"need {min_points}")
    x, y = np.log(times[good]), np.log(F[good])
    slope, intercept = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), rms, n, n_excluded


def default_fit_window(times, collapse_time, t_heisenberg=np.inf, min_points=20):
    """Default long-time window and the rule that produced it.

    ``[3 * collapse_time, min(t_H, t_max)]`` normally. Without a detected
    collapse the whole positive part of the series is used. When the
    Heisenberg time cuts the window below ``min_points`` the cap is dropped.
    """
    times = np.asarray(times, dtype=float)
    positive = times[times > 0]
    if collapse_time is None:
        start, rule = float(positive[0]), "no-collapse"
    else:
        start, rule = 3.0 * collapse_time, "collapse"
    end = float(min(t_heisenberg, times[-1]))
    if np.count_nonzero((times >= start) & (times <= end)) < min_points:
        end, rule = float(times[-1]), rule + "+uncapped"
    return (start, end), rule


def fit_gamma(times, F, t_heisenberg=np.inf, window=None, collapse_time=None, min_points=20):
    """Fit the long-time algebraic decay of an (ensemble-averaged) fidelity.

    See :func:`default_fit_window` for the window. When the fidelity has
    collapsed to zero for good the series is classified delocalized; with
    the default window the fit is then skipped (``gamma`` is NaN).
    """
    times = np.asarray(times, dtype=float)
    F = np.asarray(F, dtype=float)
    if collapse_time is None:
        collapse_time = detect_collapse(times, F)
    rapid = is_rapid_collapse(times, F, collapse_time)
    rule = "explicit"
    if window is None:
        window, rule = default_fit_window(times, collapse_time, t_heisenberg, min_points)
        if rapid:
            return DecayFit(float("nan"), window, float("nan"), collapse_time,
                            DELOCALIZED, rapid_collapse=True, window_rule=rule)
    window = (float(window[0]), float(window[1]))
    slope, _, rms, n, n_ex = fit_power_law(times, F, *window, min_points=min_points)
    gamma = max(0.0, -slope)
    return DecayFit(gamma, window, rms, collapse_time, classify(gamma, rapid), n, n_ex, slope,
                    rapid_collapse=rapid, window_rule=rule)


@dataclass
class GrowthFit:
    label: str
    window: tuple
    log_params: tuple
    power_params: tuple
    log_residual: float
    power_residual: float
    monotone: bool


def growth_window_end(times, S, t_start, fraction=0.8, min_points=10):
    """End of the growth phase: first time ``S`` reaches ``fraction`` of its
    maximum, or the end of the series when that leaves too few points."""
    times = np.asarray(times, dtype=float)
    S = np.asarray(S, dtype=float)
    hit = np.flatnonzero((times >= t_start) & (S >= fraction * S.max()))
    if hit.size:
        end = times[hit[0]]
        if np.count_nonzero((times >= t_start) & (times <= end)) >= min_points:
            return float(end)
    return float(times[-1])


def fit_ee_growth(times, S, window=None, margin=0.1):
    """Classify entanglement growth as faster than logarithmic or not.

    Fits ``S = a + b ln t`` and ``S = a t**p`` on the window (default: from
    ``t = 1`` to the end of the growth phase, see :func:`growth_window_end`)
    and labels the growth faster-than-logarithmic when the power law has
    ``p > 0`` and a residual at least ``margin`` lower.
    """
    times = np.asarray(times, dtype=float)
    S = np.asarray(S, dtype=float)
    if window is None:
        start = 1.0
        window = (start, growth_window_end(times, S, start))
    m = (times >= window[0]) & (times <= window[1]) & (times > 0)
    if np.count_nonzero(m) < 4:
        raise DomainError(f"EE growth window {window} holds fewer than 4 points")
    t, y = times[m], S[m]
    monotone = bool(np.all(np.diff(y) >= -1e-12))
    if not monotone:
        warnings.warn("entanglement entropy is not monotone in the fit window", RuntimeWarning)

    lt = np.log(t)
    b, a = np.polyfit(lt, y, 1)
    rss_log = float(np.sum((y - (a + b * lt)) ** 2))

    if np.all(y > 0):
        p0, la0 = np.polyfit(lt, np.log(y), 1)
        start = (np.exp(la0), p0)
    else:
        start = (max(y.mean(), 1e-12), 0.0)
    try:
        (pa, pp), _ = curve_fit(lambda x, aa, pw: aa * x ** pw, t, y, p0=start, maxfev=20000)
    except RuntimeError:
        pa, pp = start
    rss_pow = float(np.sum((y - pa * t ** pp) ** 2))

    faster = pp > 0 and rss_pow <= (1.0 - margin) * rss_log
    label = FASTER_THAN_LOG if faster else LOG_OR_SLOWER
    return GrowthFit(label, (float(window[0]), float(window[1])), (float(a), float(b)),
                     (float(pa), float(pp)), rss_log, rss_pow, monotone)


def find_revivals(times, F, ratio=2.0, min_height=0.1):
    """Local maxima of ``F`` after its first minimum that exceed ``ratio`` times
    the deepest point on either side (down to the neighbouring maxima or the
    series end) and reach at least ``min_height``.

    Returns the indices of the revival peaks.
    """
    F = np.asarray(F, dtype=float)
    minima, _ = find_peaks(-F)
    if minima.size == 0:
        return np.array([], dtype=int)
    start = minima[0]
    peaks, _ = find_peaks(F)
    peaks = peaks[peaks > start]
    bounds = np.concatenate([[start], peaks, [len(F) - 1]])
    out = []
    for k, p in enumerate(peaks):
        left = F[bounds[k]:p + 1].min()
        right = F[p:bounds[k + 2] + 1].min()
        if F[p] >= min_height and F[p] > ratio * max(left, right):
            out.append(p)
    return np.array(out, dtype=int)


def mean_survival(eigensystem, time_unit, periods=200.0, n_samples=20001):
    """Time average of ``F`` over ``[0, periods]`` natural units."""
    t = np.linspace(0.0, periods, n_samples)
    F = fidelity_series(eigensystem.coefficients, eigensystem.eigenvalues, t, time_unit)
    return float(F.mean())


def alpha_scan(alphas, n_atoms=4, spacing_d=50.0, constants=None, periods=200.0,
               n_samples=20001):
    """Mean probability of remaining in the all-p state versus ``alpha``.

    Two-body model on an ordered chain; the time average runs over
    ``periods`` natural time units of each ``alpha``.
    """
    constants = constants or CouplingConstants()
    basis = enumerate_sector(n_atoms, 2)
    geom = ordered_positions(n_atoms, spacing_d)
    out = []
    for a in alphas:
        c = constants.with_alpha(a)
        es = diagonalize(assemble(basis, geom, c))
        tu = natural_time_unit(2, spacing_d, c)
        out.append(mean_survival(es, tu, periods, n_samples))
    return np.array(out)
