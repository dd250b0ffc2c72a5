"""Numerical companion for the free-energy upper bound of the dilute Bose gas
in the Gross-Pitaevskii limit on the unit torus."""

from .lattice import build_shells, lattice_sum, ShellTable, TailEstimate
from .scattering import PotentialSpec, solve_zero_energy
from .ideal_gas import IdealGasState, beta_c, solve_mu0, state_from_kappa
from .bogoliubov import BogoliubovModel, OccupationPair
from .condensate import CondensateModel, CondensateMoments, solve_mu, moments, f_bec, upsilon
from .bound_assembler import (FreeEnergyReport, theorem_bound, corollary_condensed,
                              corollary_noncondensed, branch_gap_check)

__version__ = "0.1.0"
