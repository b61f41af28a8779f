"""Exact diagonalization of N-body resonant energy transfer in Rydberg atom chains.

Atoms in a one-dimensional array carry three Rydberg levels ``p``, ``s`` and
``s'``. At an N-body Foerster resonance the states reachable from the all-``p``
state span a sector with ``n_s' = (N - 1) n_s``; this package builds that
sector, its dipole-dipole Hamiltonian, and the quench dynamics and
thermalization diagnostics of disordered ensembles.
"""

from .analysis import (alpha_scan, classify, detect_collapse, find_revivals, fit_ee_growth,
                       fit_gamma, mean_survival)
from .basis import (SectorBasis, enumerate_sector, format_state, parse_state,
                    saturation_fraction, sector_dimension)
from .config import RunConfig
from .couplings import CouplingConstants, natural_time_unit, omega2, omega3, omega4
from .dynamics import QuenchSpec, entanglement_entropy, fidelity_series, quench_series
from .ensemble import run_cell, run_grid
from .errors import (ConfigurationError, DomainError, EnsembleError, MembershipError,
                     ResourceError, RydchainError, SolverError, UsageError)
from .geometry import ChainGeometry, ordered_positions, sample_geometry
from .hamiltonian import SectorHamiltonian, assemble
from .spectral import (EigenSystem, detect_scar_candidates, diagonalize, heisenberg_time,
                       ldos, level_spacing_ratio)

__version__ = "0.1.0"
