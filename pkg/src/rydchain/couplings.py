"""Dipole-dipole matrix elements of the three-level model.

All energies are in atomic units and all distances passed to the scalar
functions are in Bohr radii. ``mu``, ``nu`` and ``gamma_c`` are the dipole
moments of the ``p-s``, ``p-s'`` and ``s-s'`` transitions; ``delta`` is the
detuning from the two-body resonance of the intermediate steps that make up
the three- and four-body processes.
"""

from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from .errors import ConfigurationError, DomainError
from .units import BOHR_PER_UM, US_PER_AU_TIME

HOP_PS = "p-s"
HOP_PSP = "p-s'"
HOP_SSP = "s-s'"
HOP_KINDS = (HOP_PS, HOP_PSP, HOP_SSP)

_KIND_ALIASES = {
    "ps": HOP_PS, "p-s": HOP_PS, "p<->s": HOP_PS, "s-p": HOP_PS,
    "psp": HOP_PSP, "p-s'": HOP_PSP, "p<->s'": HOP_PSP, "s'-p": HOP_PSP,
    "ssp": HOP_SSP, "s-s'": HOP_SSP, "s<->s'": HOP_SSP, "s'-s": HOP_SSP,
}

_DEFAULT_DIPOLE = 1000.0
# Anchor: the nearest-neighbour three-body element at 11 um equals the
# two-body element at 50 um, i.e. gamma*mu/delta = 11**6 / (1.125 * 50**3) um^3.
_DEFAULT_DELTA = (_DEFAULT_DIPOLE * _DEFAULT_DIPOLE * 1.125
                  * (50.0 * BOHR_PER_UM) ** 3 / (11.0 * BOHR_PER_UM) ** 6)


@dataclass(frozen=True)
class CouplingConstants:
    mu: float = _DEFAULT_DIPOLE
    nu: float = _DEFAULT_DIPOLE
    gamma_c: float = _DEFAULT_DIPOLE
    delta: float = _DEFAULT_DELTA
    alpha: float = 1.0
    hop_ps: bool = True
    hop_psp: bool = True
    hop_ssp: bool = True

    def __post_init__(self):
        for name in ("mu", "nu", "gamma_c", "delta"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.alpha <= 1:
            raise ConfigurationError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def hopping_enabled(self):
        return {HOP_PS: self.hop_ps, HOP_PSP: self.hop_psp, HOP_SSP: self.hop_ssp}

    def hop_strength(self, kind):
        """Dipole product ``d1*d2`` of a hopping kind (0 when disabled)."""
        kind = _normalise_kind(kind)
        if not self.hopping_enabled[kind]:
            return 0.0
        return {HOP_PS: self.mu ** 2, HOP_PSP: self.nu ** 2, HOP_SSP: self.gamma_c ** 2}[kind]

    def without_hopping(self):
        return CouplingConstants(self.mu, self.nu, self.gamma_c, self.delta, self.alpha,
                                 False, False, False)

    def with_alpha(self, alpha):
        return CouplingConstants(self.mu, self.nu, self.gamma_c, self.delta, alpha,
                                 self.hop_ps, self.hop_psp, self.hop_ssp)

    def to_dict(self):
        return asdict(self)


def unit_constants(**overrides):
    """Constants with every dipole moment and the detuning set to 1."""
    values = dict(mu=1.0, nu=1.0, gamma_c=1.0, delta=1.0)
    values.update(overrides)
    return CouplingConstants(**values)


def _normalise_kind(kind):
    try:
        return _KIND_ALIASES[str(kind).lower().replace(" ", "")]
    except KeyError:
        raise DomainError(f"unknown hopping kind {kind!r}") from None


def _check_r(R):
    if not R > 0:
        raise DomainError(f"distance must be positive, got {R}")


def omega2(R, c):
    """Field-tuned two-body element ``alpha * mu * nu / R**3``."""
    _check_r(R)
    return c.alpha * c.mu * c.nu / R ** 3


def hop_element(kind, R, c):
    """Always-resonant exchange element for a hopping kind."""
    kind = _normalise_kind(kind)
    _check_r(R)
    return c.hop_strength(kind) / R ** 3


def _positions(positions):
    if hasattr(positions, "positions_au"):
        return positions.positions_au
    return np.asarray(positions, dtype=float)


def _distinct(*idx):
    if len(set(idx)) != len(idx):
        raise DomainError(f"atom indices must be distinct, got {idx}")


def omega3(i, j, k, positions, c):
    """Three-body element with atoms ``i``, ``j`` ending in ``s'`` and ``k`` in ``s``.

    ``positions`` is an array in Bohr radii or a :class:`ChainGeometry`.
    """
    _distinct(i, j, k)
    x = _positions(positions)
    rij, rik, rjk = abs(x[i] - x[j]), abs(x[i] - x[k]), abs(x[j] - x[k])
    return (c.gamma_c * c.mu ** 2 * c.nu / (c.delta * rij ** 3)) * (1 / rik ** 3 + 1 / rjk ** 3)


def omega4(i, j, k, l, positions, c):
    """Four-body element with atoms ``i, j, k`` ending in ``s'`` and ``l`` in ``s``."""
    _distinct(i, j, k, l)
    x = _positions(positions)

    def inv3(a, b):
        return 1.0 / abs(x[a] - x[b]) ** 3

    ij, ik, jk = inv3(i, j), inv3(i, k), inv3(j, k)
    bracket = (inv3(i, l) * (ij * jk + ik * jk)
               + inv3(j, l) * (ij * ik + ik * jk)
               + inv3(k, l) * (ij * ik + ij * jk))
    return c.gamma_c ** 2 * c.mu ** 3 * c.nu / c.delta ** 2 * bracket


def inverse_cubes(positions_au):
    """Matrix of ``1/R_ij**3`` with a zero diagonal."""
    x = np.asarray(positions_au, dtype=float)
    r = np.abs(x[:, None] - x[None, :])
    with np.errstate(divide="ignore"):
        out = 1.0 / r ** 3
    np.fill_diagonal(out, 0.0)
    return out


def field_tuned_table(order, positions_au, c):
    """All field-tuned processes of a given order.

    Returns ``(groups, s_site, values)`` where ``groups`` holds each ordered
    subset of ``order`` atoms, ``s_site`` the atom that ends in ``s`` and
    ``values`` the matrix element. One entry per (subset, choice of s atom).
    """
    x = np.asarray(positions_au, dtype=float)
    n = len(x)
    groups, s_sites, values = [], [], []
    for group in combinations(range(n), order):
        for s in group:
            rest = [a for a in group if a != s]
            if order == 2:
                v = omega2(abs(x[rest[0]] - x[s]), c)
            elif order == 3:
                v = omega3(rest[0], rest[1], s, x, c)
            else:
                v = omega4(rest[0], rest[1], rest[2], s, x, c)
            groups.append(group)
            s_sites.append(s)
            values.append(v)
    return (np.array(groups, dtype=np.int64).reshape(-1, order),
            np.array(s_sites, dtype=np.int64), np.array(values))


def natural_time_unit(order, spacing_d, c):
    """Reciprocal of the nearest-neighbour ``order``-body element at spacing ``d`` (um).

    Returned in atomic units of time; see :func:`time_unit_us`.
    """
    if not spacing_d > 0:
        raise DomainError(f"spacing must be positive, got {spacing_d}")
    x = np.arange(order, dtype=float) * spacing_d * BOHR_PER_UM
    if order == 2:
        om = omega2(x[1] - x[0], c)
    elif order == 3:
        om = omega3(0, 1, 2, x, c)
    elif order == 4:
        om = omega4(0, 1, 2, 3, x, c)
    else:
        raise ConfigurationError(f"interaction order must be 2, 3 or 4, got {order!r}")
    return 1.0 / abs(om)


def time_unit_us(order, spacing_d, c):
    return natural_time_unit(order, spacing_d, c) * US_PER_AU_TIME

