"""Independent small-system reference implementation.

Builds the sector by filtering all 3**n strings, fills the Hamiltonian by
scanning every pair of states and classifying their difference, and
propagates with a dense matrix exponential. Nothing is imported from the
package; the element formulas are written out in a symmetric form of
their own.
"""

import itertools

import numpy as np
import scipy.linalg

LEVELS = ("p", "s", "s'")


def sector_states(n, order):
    keep = [c for c in itertools.product(range(3), repeat=n)
            if c.count(2) == (order - 1) * c.count(1)]
    return sorted(keep, key=lambda c: (c.count(1), c))


def _inv3(x, a, b):
    return 1.0 / abs(x[a] - x[b]) ** 3


def _field_element(order, x, s_atom, sp_atoms, mu, nu, gam, delta, alpha):
    if order == 2:
        return alpha * mu * nu * _inv3(x, s_atom, sp_atoms[0])
    if order == 3:
        a, b = sp_atoms
        return gam * mu ** 2 * nu / delta * _inv3(x, a, b) * (_inv3(x, a, s_atom)
                                                             + _inv3(x, b, s_atom))
    # order 4: each s' atom m meets the s atom last; the other two s' atoms
    # a, b pair up first and one of them is then joined with m
    total = 0.0
    for m in sp_atoms:
        a, b = [q for q in sp_atoms if q != m]
        total += _inv3(x, m, s_atom) * _inv3(x, a, b) * (_inv3(x, m, a) + _inv3(x, m, b))
    return gam ** 2 * mu ** 3 * nu / delta ** 2 * total


def hamiltonian(n, order, x, mu=1.0, nu=1.0, gam=1.0, delta=1.0, alpha=1.0,
                hopping=(True, True, True)):
    """Dense Hamiltonian on the sector by all-pairs classification."""
    states = sector_states(n, order)
    dip = {frozenset((0, 1)): (mu * mu, hopping[0]),
           frozenset((0, 2)): (nu * nu, hopping[1]),
           frozenset((1, 2)): (gam * gam, hopping[2])}
    H = np.zeros((len(states), len(states)))
    for r, a in enumerate(states):
        for c, b in enumerate(states):
            diff = [i for i in range(n) if a[i] != b[i]]
            if len(diff) == 2 and a[diff[0]] == b[diff[1]] and a[diff[1]] == b[diff[0]]:
                i, j = diff
                strength, on = dip[frozenset((a[i], a[j]))]
                if on:
                    H[r, c] = strength * _inv3(x, i, j)
            elif len(diff) == order:
                for lo, hi in ((a, b), (b, a)):
                    if all(lo[i] == 0 for i in diff):
                        s_atoms = [i for i in diff if hi[i] == 1]
                        sp_atoms = [i for i in diff if hi[i] == 2]
                        if len(s_atoms) == 1 and len(sp_atoms) == order - 1:
                            H[r, c] = _field_element(order, x, s_atoms[0], sp_atoms,
                                                     mu, nu, gam, delta, alpha)
    return states, H


def evolve(H, index, t):
    psi0 = np.zeros(H.shape[0], dtype=complex)
    psi0[index] = 1.0
    return scipy.linalg.expm(-1j * H * t) @ psi0
