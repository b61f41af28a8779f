"""Resonant-sector Hilbert space of the three-level chain.

Each atom sits in one of three levels: ``p`` (initial), ``s`` (upper final)
and ``s'`` (lower final). An order-``N`` field-tuned process converts ``N``
``p`` atoms into one ``s`` and ``N - 1`` ``s'`` atoms, so every configuration
reachable from the all-``p`` state obeys ``n_s' = (N - 1) n_s``. This module
enumerates that sector, ranks and unranks its states and computes the
sector-averaged ``s`` population.

States are stored as rows of small integer codes (``P = 0``, ``S = 1``,
``SP = 2``) and, for lookup, as 2-bit packed integer keys with site 0 in the
most significant position.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import ConfigurationError, DomainError, MembershipError, ResourceError
from .units import DEFAULT_MEMORY_BUDGET

P, S, SP = 0, 1, 2
LABELS = ("p", "s", "s'")
ORDERS = (2, 3, 4)


def check_order(order):
    if order not in ORDERS:
        raise ConfigurationError(f"interaction order must be one of {ORDERS}, got {order!r}")
    return int(order)


def _multinomial(n, k, order):
    """Number of arrangements with ``k`` s atoms in an order-``order`` sector."""
    n_sp = (order - 1) * k
    return factorial(n) // (factorial(n - k - n_sp) * factorial(k) * factorial(n_sp))


def sector_dimension(n_atoms, order):
    """Dimension of the resonant sector.

    Examples
    --------
    >>> sector_dimension(13, 3)
    93094
    """
    order = check_order(order)
    if n_atoms < 1:
        raise DomainError(f"n_atoms must be >= 1, got {n_atoms}")
    return sum(_multinomial(n_atoms, k, order) for k in range(n_atoms // order + 1))


def saturation_fraction(n_atoms, order):
    """Sector-averaged fraction of atoms in ``s``.

    This is the long-time ``s`` population predicted when every eigenstate of
    the sector is thermodynamically equivalent. Computed from closed-form
    counts, so it is cheap for any ``n_atoms``.
    """
    order = check_order(order)
    if n_atoms < 1:
        raise DomainError(f"n_atoms must be >= 1, got {n_atoms}")
    ks = range(n_atoms // order + 1)
    total_s = sum(k * _multinomial(n_atoms, k, order) for k in ks)
    return total_s / sector_dimension(n_atoms, order) / n_atoms


def _lex_arrangements(counts, n):
    """Yield all arrangements of a multiset of codes in lexicographic order."""
    out = [0] * n

    def rec(pos):
        if pos == n:
            yield tuple(out)
            return
        for code in range(3):
            if counts[code]:
                counts[code] -= 1
                out[pos] = code
                yield from rec(pos + 1)
                counts[code] += 1

    yield from rec(0)


def pack(codes):
    """Pack a code sequence (or a 2-D array of them, row-wise) into integer keys."""
    codes = np.asarray(codes, dtype=np.int64)
    n = codes.shape[-1]
    shifts = 2 * np.arange(n - 1, -1, -1, dtype=np.int64)
    return (codes << shifts).sum(axis=-1)


def site_shift(n_atoms, site):
    """Bit offset of ``site`` inside a packed key."""
    return 2 * (n_atoms - 1 - site)


def parse_state(text):
    """Parse an occupation string such as ``"pss'p"`` into a code tuple."""
    codes = []
    i = 0
    text = text.strip().lower()
    while i < len(text):
        ch = text[i]
        if ch == "p":
            codes.append(P)
        elif ch == "s":
            if i + 1 < len(text) and text[i + 1] == "'":
                codes.append(SP)
                i += 1
            else:
                codes.append(S)
        elif ch in " ,|":
            pass
        else:
            raise DomainError(f"unrecognised level {ch!r} in state {text!r}")
        i += 1
    return tuple(codes)


def format_state(codes):
    return "".join(LABELS[c] for c in codes)


def sector_violation(codes, order):
    """Describe why ``codes`` is outside the order-``order`` sector, or return None."""
    codes = np.asarray(codes)
    if codes.size and (codes.min() < 0 or codes.max() > 2):
        return "site labels must be p, s or s'"
    n_s = int(np.count_nonzero(codes == S))
    n_sp = int(np.count_nonzero(codes == SP))
    if n_sp != (order - 1) * n_s:
        return (f"conservation law n_s' = {order - 1}*n_s violated "
                f"(n_s = {n_s}, n_s' = {n_sp})")
    return None


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Canonically ordered basis of the resonant sector.

    States are sorted by number of ``s`` atoms, then lexicographically by
    occupation (``p < s < s'``), so the all-``p`` state is index 0.
    """

    order: int
    n_atoms: int
    states: np.ndarray  # (dim, n_atoms) uint8 codes
    keys: np.ndarray = field(repr=False)
    _sorted_keys: np.ndarray = field(repr=False)
    _sorted_pos: np.ndarray = field(repr=False)
    _index: dict = field(repr=False)

    @property
    def dim(self):
        return len(self.keys)

    def __len__(self):
        return self.dim

    @property
    def n_s(self):
        return np.count_nonzero(self.states == S, axis=1)

    def rank(self, state):
        """Index of ``state`` (code sequence or occupation string)."""
        if isinstance(state, str):
            state = parse_state(state)
        codes = tuple(int(c) for c in state)
        if len(codes) != self.n_atoms:
            raise MembershipError(
                f"state has {len(codes)} sites, basis has {self.n_atoms}")
        try:
            return self._index[int(pack(codes))]
        except KeyError:
            why = sector_violation(codes, self.order) or "not present in basis"
            raise MembershipError(
                f"state {format_state(codes)!r} is outside the order-{self.order} "
                f"sector: {why}") from None

    def unrank(self, index):
        if not 0 <= index < self.dim:
            raise DomainError(f"index {index} out of range for dimension {self.dim}")
        return tuple(int(c) for c in self.states[index])

    def lookup(self, keys):
        """Vectorised rank of packed keys; returns -1 where a key is absent."""
        keys = np.asarray(keys, dtype=np.int64)
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, self.dim - 1)
        found = self._sorted_keys[pos] == keys
        return np.where(found, self._sorted_pos[pos], -1)

    def to_text(self):
        """Basis dump: header ``order n_atoms dimension`` then one state per line."""
        lines = [f"{self.order} {self.n_atoms} {self.dim}"]
        lines.extend(format_state(row) for row in self.states)
        return "\n".join(lines) + "\n"


def enumerate_sector(n_atoms, order, memory_budget=DEFAULT_MEMORY_BUDGET):
    """Build the canonically ordered sector basis."""
    order = check_order(order)
    dim = sector_dimension(n_atoms, order)
    if n_atoms > 31:
        raise ResourceError(f"packed keys support at most 31 atoms, got {n_atoms}")
    need = dim * (n_atoms + 32)
    if need > memory_budget:
        raise ResourceError(
            f"sector dimension {dim} needs ~{need} bytes, budget is {memory_budget}")

    states = np.empty((dim, n_atoms), dtype=np.uint8)
    row = 0
    for k in range(n_atoms // order + 1):
        n_sp = (order - 1) * k
        counts = [n_atoms - k - n_sp, k, n_sp]
        for arr in _lex_arrangements(counts, n_atoms):
            states[row] = arr
            row += 1
    assert row == dim

    keys = pack(states)
    sorted_pos = np.argsort(keys, kind="stable")
    index = {int(key): i for i, key in enumerate(keys)}
    if len(index) != dim:
        raise AssertionError("duplicate states in sector enumeration")
    return SectorBasis(order, n_atoms, states, keys, keys[sorted_pos], sorted_pos, index)


def unrank_combinatorial(index, n_atoms, order):
    """Unrank by counting, without materialising the basis.

    Independent of :func:`enumerate_sector`; used as a cross-check.
    """
    order = check_order(order)
    dim = sector_dimension(n_atoms, order)
    if not 0 <= index < dim:
        raise DomainError(f"index {index} out of range for dimension {dim}")
    k = 0
    while True:
        block = _multinomial(n_atoms, k, order)
        if index < block:
            break
        index -= block
        k += 1
    counts = [n_atoms - order * k, k, (order - 1) * k]
    out = []
    for pos in range(n_atoms):
        remaining = n_atoms - pos - 1
        for code in range(3):
            if not counts[code]:
                continue
            counts[code] -= 1
            n_rest = factorial(remaining) // (
                factorial(counts[0]) * factorial(counts[1]) * factorial(counts[2]))
            if index < n_rest:
                out.append(code)
                break
            index -= n_rest
            counts[code] += 1
    return tuple(out)
