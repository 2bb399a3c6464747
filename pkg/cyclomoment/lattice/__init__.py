from .loglattice import LogUnitLattice, build_lattice, dual_norm_character, group_reps
from .sgp import SgpConfig, SgpReport, babai_round_off, monte_carlo, run_trial
