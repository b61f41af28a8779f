"""Disorder-ensemble execution over a grid of spacings and disorder strengths.

Each sample is a pure function of ``(config, d, w, sample index)``: the
geometry seed is derived from the base seed and the sample index, so the
results do not depend on how samples are distributed over workers. Samples
run in a process pool, each worker with single-threaded BLAS; aggregation
happens in sample order after all samples of a cell are back.
"""

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .analysis import NOT_APPLICABLE, DecayFit, fit_ee_growth, fit_gamma
from .basis import saturation_fraction
from .couplings import natural_time_unit
from .errors import ConfigurationError, DomainError, EnsembleError, RydchainError
from .geometry import sample_geometry, sample_seed
from .hamiltonian import assemble
from .dynamics import quench_series
from .spectral import diagonalize, heisenberg_time, level_spacing_ratio
from .units import US_PER_AU_TIME

#: Environment variable overriding the configured worker count.
WORKERS_ENV = "RYDCHAIN_WORKERS"

#: Largest tolerated share of failed samples in a cell.
MAX_FAILURE_RATE = 0.01

__version__ = "0.1.0"


def worker_count(config):
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return config.workers
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigurationError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass
class SampleResult:
    index: int
    seed: int
    fidelity: np.ndarray = None
    s_fraction: np.ndarray = None
    ee_raw: np.ndarray = None
    ee_normalized: np.ndarray = None
    mean_r: float = float("nan")
    t_heisenberg: float = float("nan")
    error: str = None

    @property
    def ok(self):
        return self.error is None


def run_sample(config, basis, d, w, index):
    """One disorder realization; solver and domain failures are captured."""
    seed = sample_seed(config.base_seed, index)
    try:
        geom = sample_geometry(config.n_atoms, d, w, config.base_seed, index)
        constants = config.constants()
        H = assemble(basis, geom, constants, memory_budget=config.memory_budget)
        es = diagonalize(H)
        tu = natural_time_unit(config.order, d, constants)
        t_h = heisenberg_time(es.eigenvalues, tu)[1]
        metrics = tuple(m for m in config.metrics if m != "spectrum")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            series = quench_series(es, basis, config.quench(), tu,
                                   saturation_fraction(config.n_atoms, config.order),
                                   t_h, metrics)
        mean_r = float("nan")
        if "spectrum" in config.metrics:
            mean_r = level_spacing_ratio(es.eigenvalues).mean_r
        return SampleResult(index, seed, series.fidelity, series.s_fraction, series.ee_raw,
                            series.ee_normalized, mean_r, float(t_h))
    except (RydchainError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return SampleResult(index, seed, error=f"{type(exc).__name__}: {exc}")


# process-pool plumbing; the basis is built once per worker
_WORKER_STATE = {}


def _init_worker(config):
    _WORKER_STATE["config"] = config
    _WORKER_STATE["basis"] = config.basis()
    _WORKER_STATE["limits"] = threadpool_limits(1)


def _pool_task(args):
    d, w, index = args
    return run_sample(_WORKER_STATE["config"], _WORKER_STATE["basis"], d, w, index)


def _run_samples(config, tasks, workers, basis=None):
    if workers == 1 or len(tasks) == 1:
        basis = basis if basis is not None else config.basis()
        with threadpool_limits(1):
            return [run_sample(config, basis, d, w, i) for d, w, i in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(config,)) as pool:
        return list(pool.map(_pool_task, tasks, chunksize=chunk))


def _mean_se(rows):
    # shifted by the first sample so identical samples give exactly zero spread
    a = np.asarray(rows, dtype=float)
    dev = a - a[0]
    mean = a[0] + dev.mean(axis=0)
    if len(a) < 2:
        return mean, np.zeros_like(mean)
    return mean, dev.std(axis=0, ddof=1) / np.sqrt(len(a))


def _nan_to_none(x):
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


@dataclass
class CellResult:
    """Ensemble averages and fits of one ``(d, w)`` cell."""

    order: int
    n_atoms: int
    d_um: float
    w: float
    times: np.ndarray
    time_unit: float
    saturation: float
    seeds: list
    fidelity: np.ndarray
    fidelity_se: np.ndarray
    s_fraction: np.ndarray
    s_fraction_se: np.ndarray
    ee_raw: np.ndarray
    ee_raw_se: np.ndarray
    ee_normalized: np.ndarray
    ee_normalized_se: np.ndarray
    mean_r: float
    mean_r_se: float
    t_heisenberg: float
    decay: DecayFit
    ee_growth: object
    sample_mean_r: np.ndarray
    sample_t_heisenberg: np.ndarray
    sample_gamma: np.ndarray
    failures: dict = field(default_factory=dict)

    @property
    def n_samples(self):
        return len(self.seeds)

    @property
    def n_failed(self):
        return len(self.failures)

    @property
    def ee_growth_label(self):
        return None if self.ee_growth is None else self.ee_growth.label

    @property
    def series_columns(self):
        return {
            "t_natural": self.times,
            "t_us": self.times * self.time_unit * US_PER_AU_TIME,
            "fidelity": self.fidelity,
            "s_fraction": self.s_fraction,
            "s_over_saturation": self.s_fraction / self.saturation,
            "ee_raw": self.ee_raw,
            "ee_normalized": self.ee_normalized,
        }

    @property
    def error_columns(self):
        return {
            "t_natural": self.times,
            "fidelity_se": self.fidelity_se,
            "s_fraction_se": self.s_fraction_se,
            "ee_raw_se": self.ee_raw_se,
            "ee_normalized_se": self.ee_normalized_se,
        }

    def fit_report(self):
        """Fit summary with the fixed key set of the per-cell JSON report."""
        d = self.decay
        return {
            "order": self.order,
            "d_um": self.d_um,
            "w": self.w,
            "gamma": _nan_to_none(d.gamma),
            "residual": _nan_to_none(d.residual),
            "window": list(d.fit_window) if d.fit_window else None,
            "classification": d.classification,
            "mean_r": _nan_to_none(self.mean_r),
            "ee_growth_label": self.ee_growth_label,
        }

    def details(self):
        d = self.decay
        return {
            "n_atoms": self.n_atoms,
            "n_samples": self.n_samples,
            "n_failed": self.n_failed,
            "failures": {str(k): v for k, v in sorted(self.failures.items())},
            "seeds": list(self.seeds),
            "time_unit_au": self.time_unit,
            "saturation": self.saturation,
            "t_heisenberg": _nan_to_none(self.t_heisenberg),
            "mean_r_se": _nan_to_none(self.mean_r_se),
            "collapse_time": d.collapse_time,
            "rapid_collapse": d.rapid_collapse,
            "window_rule": d.window_rule,
            "fit_points": d.n_points,
            "fit_excluded": d.n_excluded,
            "sample_gamma": [_nan_to_none(float(g)) for g in self.sample_gamma],
            "ee_growth": None if self.ee_growth is None else {
                "window": list(self.ee_growth.window),
                "log_params": list(self.ee_growth.log_params),
                "power_params": list(self.ee_growth.power_params),
                "log_residual": self.ee_growth.log_residual,
                "power_residual": self.ee_growth.power_residual,
            },
        }


def _decay_or_na(times, F, t_h):
    try:
        return fit_gamma(times, F, t_h)
    except DomainError:
        return DecayFit(float("nan"), None, float("nan"), None, NOT_APPLICABLE)


def aggregate(config, d, w, samples):
    """Average the successful samples of a cell and run the fits."""
    failures = {s.index: s.error for s in samples if not s.ok}
    good = [s for s in samples if s.ok]
    if len(failures) > MAX_FAILURE_RATE * len(samples) or not good:
        raise EnsembleError(
            f"cell d={d} w={w}: {len(failures)} of {len(samples)} samples failed "
            f"(limit {MAX_FAILURE_RATE:.0%}); first failure: "
            f"{next(iter(failures.values()), '')}")
    times = config.time_grid()
    tu = natural_time_unit(config.order, d, config.constants())
    F, F_se = _mean_se([s.fidelity for s in good])
    sf, sf_se = _mean_se([s.s_fraction for s in good])
    ee, ee_se = _mean_se([s.ee_raw for s in good])
    een, een_se = _mean_se([s.ee_normalized for s in good])
    rs = np.array([s.mean_r for s in good])
    r_mean, r_se = _mean_se(rs)
    t_hs = np.array([s.t_heisenberg for s in good])
    t_h = float(np.mean(t_hs))

    decay = _decay_or_na(times, F, t_h) if "fidelity" in config.metrics else \
        DecayFit(float("nan"), None, float("nan"), None, NOT_APPLICABLE)
    sample_gamma = np.array([_decay_or_na(times, s.fidelity, s.t_heisenberg).gamma
                             if "fidelity" in config.metrics else np.nan for s in good])
    growth = None
    if "ee" in config.metrics:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            try:
                growth = fit_ee_growth(times, een)
            except DomainError:
                growth = None
    return CellResult(
        config.order, config.n_atoms, float(d), float(w), times, tu,
        saturation_fraction(config.n_atoms, config.order),
        [s.seed for s in samples], F, F_se, sf, sf_se, ee, ee_se, een, een_se,
        float(r_mean), float(r_se), t_h, decay, growth, rs, t_hs, sample_gamma, failures)


def run_cell(config, d, w, workers=None, basis=None):
    """Run every sample of one ``(d, w)`` cell and aggregate."""
    config.check_budget()
    workers = worker_count(config) if workers is None else workers
    tasks = [(float(d), float(w), i) for i in range(config.samples)]
    return aggregate(config, d, w, _run_samples(config, tasks, workers, basis))


@dataclass
class EnsembleResult:
    config: object
    cells: list
    failed_cells: dict = field(default_factory=dict)

    def provenance(self):
        return {
            "config_digest": self.config.digest(),
            "code_version": __version__,
            "base_seed": self.config.base_seed,
            "samples": self.config.samples,
            "n_times": self.config.n_times,
        }

    def cell(self, d, w):
        for c in self.cells:
            if c.d_um == float(d) and c.w == float(w):
                return c
        raise KeyError((d, w))


def run_grid(config, workers=None, strict=True):
    """All ``(d, w)`` cells of the configuration.

    Samples of all cells share one process pool. Cells whose failure rate
    exceeds the limit are collected in ``failed_cells``; with ``strict`` an
    :class:`EnsembleError` listing all of them is raised at the end.
    """
    config.check_budget()
    workers = worker_count(config) if workers is None else workers
    tasks = [(d, w, i) for d, w in config.cells() for i in range(config.samples)]
    results = _run_samples(config, tasks, workers)
    cells, failed = [], {}
    for k, (d, w) in enumerate(config.cells()):
        chunk = results[k * config.samples:(k + 1) * config.samples]
        try:
            cells.append(aggregate(config, d, w, chunk))
        except EnsembleError as exc:
            failed[(d, w)] = str(exc)
    result = EnsembleResult(config, cells, failed)
    if strict and failed:
        lines = "; ".join(f"(d={d}, w={w}): {msg}" for (d, w), msg in failed.items())
        raise EnsembleError(f"{len(failed)} of {len(config.cells())} cells failed: {lines}")
    return result
