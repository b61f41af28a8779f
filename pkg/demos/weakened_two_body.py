r"""Weakening the field-tuned process
=================================

In the two-body model the field-tuned element ``alpha * mu * nu / R**3``
can be scaled down while the hopping stays put. Small ``alpha`` mimics the
three-body situation, where hopping dominates. Two signatures follow: the
time-averaged probability of staying in the all-``p`` state rises towards
one, and a few eigenstates near zero energy take up most of the
initial-state weight.

``python demos/weakened_two_body.py``
"""

import numpy as np

from rydchain import (CouplingConstants, assemble, detect_scar_candidates, diagonalize,
                      enumerate_sector, ordered_positions)
from rydchain.analysis import alpha_scan
from rydchain.spectral import gaussian_fit, ldos, scar_concentration

alphas = [1.0, 1 / 3, 1 / 10, 1 / 30, 1 / 60, 1 / 100]
P = alpha_scan(alphas, n_atoms=4)
for a, p in zip(alphas, P):
    print(f"1/alpha = {1 / a:6.1f}   <P_i> = {p:.3f}")

######################################################################
# Local density of states
# -----------------------
#
# At ``alpha = 1`` the initial state spreads over a near-Gaussian band;
# at ``alpha = 1/60`` a few states carry most of the weight.

n = 8
basis = enumerate_sector(n, 2)
geom = ordered_positions(n, 50.0)
for a in (1.0, 1 / 60):
    es = diagonalize(assemble(basis, geom, CouplingConstants().with_alpha(a)))
    g = gaussian_fit(ldos(es, 40))
    flagged = detect_scar_candidates(es)
    top = np.sort(es.overlaps)[::-1][:3]
    print(f"alpha = {a:.4f}: LDOS width {g.width:.3e} au (R^2 {g.r_squared:.2f}), "
          f"largest overlaps {np.round(top, 3)}, {flagged.size} scar candidates, "
          f"central weight {scar_concentration(es, flagged) if flagged.size else 0:.2f}")
