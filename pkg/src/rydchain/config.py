"""Run configuration as a flat ``key = value`` text file.

One key per line, ``#`` starts a comment, lists are comma separated::

    order = 3
    n_atoms = 9
    spacings_um = 9
    disorders = 0.05, 0.45
    samples = 50

Unknown keys are rejected, so a misspelt physics parameter can never fall
back silently to its default.
"""

import hashlib
from dataclasses import dataclass, fields, replace

from .basis import check_order, enumerate_sector, parse_state, sector_dimension
from .couplings import CouplingConstants
from .dynamics import QuenchSpec, all_p, default_time_grid
from .errors import ConfigurationError, ResourceError
from .geometry import DEFAULT_DISORDERS, DEFAULT_SPACINGS
from .hamiltonian import dense_bytes
from .units import DEFAULT_MEMORY_BUDGET

METRICS = ("fidelity", "s_fraction", "ee", "spectrum")

_DEFAULT_CONSTANTS = CouplingConstants()


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _parse_optional_int(text):
    return None if text.strip().lower() in ("", "none", "auto") else int(text)


def _parse_metrics(text):
    items = tuple(v.strip() for v in text.split(",") if v.strip())
    bad = [m for m in items if m not in METRICS]
    if bad:
        raise ValueError(f"unknown metric(s) {bad}; choose from {list(METRICS)}")
    return items


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return "none" if value is None else str(value)


# key -> parser; the order here is the order of the serialized file
_PARSERS = {
    "order": int,
    "n_atoms": int,
    "spacings_um": _parse_floats,
    "disorders": _parse_floats,
    "samples": int,
    "base_seed": int,
    "t_min": float,
    "t_max": float,
    "n_times": int,
    "include_zero": _parse_bool,
    "mu": float,
    "nu": float,
    "gamma_c": float,
    "delta": float,
    "alpha": float,
    "hop_ps": _parse_bool,
    "hop_psp": _parse_bool,
    "hop_ssp": _parse_bool,
    "initial_pattern": str,
    "cut": _parse_optional_int,
    "output_dir": str,
    "metrics": _parse_metrics,
    "memory_budget": int,
    "workers": int,
}


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines the output of an ensemble run.

    ``spacings_um`` defaults to the standard grid of the chosen order and
    ``initial_pattern`` to the all-``p`` state.
    """

    order: int = 3
    n_atoms: int = 9
    spacings_um: tuple = None
    disorders: tuple = DEFAULT_DISORDERS
    samples: int = 100
    base_seed: int = 20240101
    t_min: float = 1e-2
    t_max: float = 1e2
    n_times: int = 400
    include_zero: bool = True
    mu: float = _DEFAULT_CONSTANTS.mu
    nu: float = _DEFAULT_CONSTANTS.nu
    gamma_c: float = _DEFAULT_CONSTANTS.gamma_c
    delta: float = _DEFAULT_CONSTANTS.delta
    alpha: float = 1.0
    hop_ps: bool = True
    hop_psp: bool = True
    hop_ssp: bool = True
    initial_pattern: str = None
    cut: int = None
    output_dir: str = "results"
    metrics: tuple = ("fidelity", "s_fraction", "ee", "spectrum")
    memory_budget: int = DEFAULT_MEMORY_BUDGET
    workers: int = 1

    def __post_init__(self):
        try:
            check_order(self.order)
        except Exception as exc:
            raise ConfigurationError(str(exc)) from None
        if self.n_atoms < self.order:
            raise ConfigurationError(f"n_atoms must be at least the order ({self.order}), "
                                     f"got {self.n_atoms}")
        if self.spacings_um is None:
            object.__setattr__(self, "spacings_um", DEFAULT_SPACINGS[self.order])
        object.__setattr__(self, "spacings_um", tuple(float(d) for d in self.spacings_um))
        object.__setattr__(self, "disorders", tuple(float(w) for w in self.disorders))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        bad = [m for m in self.metrics if m not in METRICS]
        if bad:
            raise ConfigurationError(f"unknown metric(s) {bad}; choose from {list(METRICS)}")
        if self.initial_pattern is None:
            object.__setattr__(self, "initial_pattern", all_p(self.n_atoms))
        if not self.spacings_um or min(self.spacings_um) <= 0:
            raise ConfigurationError("spacings_um must be a non-empty list of positive values")
        if not self.disorders or not all(0 <= w < 0.5 for w in self.disorders):
            raise ConfigurationError("disorders must be a non-empty list in [0, 0.5)")
        if self.samples < 1:
            raise ConfigurationError(f"samples must be at least 1, got {self.samples}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}")
        if not 0 < self.t_min < self.t_max or self.n_times < 2:
            raise ConfigurationError("time grid needs 0 < t_min < t_max and n_times >= 2")
        if len(parse_state(self.initial_pattern)) != self.n_atoms:
            raise ConfigurationError(
                f"initial_pattern {self.initial_pattern!r} does not have {self.n_atoms} sites")
        if self.cut is not None and not 0 < self.cut < self.n_atoms:
            raise ConfigurationError(f"cut must satisfy 0 < cut < {self.n_atoms}")
        self.constants()  # validates mu, nu, gamma_c, delta, alpha

    # derived objects

    def constants(self):
        try:
            return CouplingConstants(self.mu, self.nu, self.gamma_c, self.delta, self.alpha,
                                     self.hop_ps, self.hop_psp, self.hop_ssp)
        except ConfigurationError:
            raise
        except Exception as exc:
            raise ConfigurationError(str(exc)) from None

    def time_grid(self):
        return default_time_grid(self.t_min, self.t_max, self.n_times, self.include_zero)

    def quench(self):
        return QuenchSpec(self.initial_pattern, self.time_grid(), self.cut)

    def dimension(self):
        return sector_dimension(self.n_atoms, self.order)

    def basis(self):
        return enumerate_sector(self.n_atoms, self.order, self.memory_budget)

    def check_budget(self):
        need = dense_bytes(self.dimension())
        if need > self.memory_budget:
            raise ResourceError(f"sector dimension {self.dimension()} needs {need} bytes for a "
                                f"dense Hamiltonian, budget is {self.memory_budget}")

    def cells(self):
        return [(d, w) for d in self.spacings_um for w in self.disorders]

    def with_overrides(self, **kw):
        return replace(self, **kw)

    # serialization

    def to_text(self):
        lines = [f"{k} = {_fmt(getattr(self, k))}" for k in _PARSERS]
        return "\n".join(lines) + "\n"

    def physics_text(self):
        # output-affecting keys only; workers and output_dir do not change results
        return "".join(line + "\n" for line in self.to_text().splitlines()
                       if not line.startswith(("workers", "output_dir")))

    def digest(self):
        return hashlib.sha256(self.physics_text().encode()).hexdigest()

    @classmethod
    def from_text(cls, text, **overrides):
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _PARSERS:
                raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
            try:
                values[key] = _PARSERS[key](value)
            except ValueError as exc:
                raise ConfigurationError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def load(cls, path, **overrides):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, **overrides)

    def save(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_text())


def config_keys():
    return tuple(_PARSERS)


assert set(_PARSERS) == {f.name for f in fields(RunConfig)}
