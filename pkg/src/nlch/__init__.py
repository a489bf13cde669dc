"""Nonlocal Cahn-Hilliard equation with exponential SAV time stepping on periodic 2D grids."""
from ._accel import HAVE_NUMBA, backend
from .energy import (PotentialSpec, SavConfigError, SavState, StabilityError, chemical_potential_bar,
                     discrete_energy, dissipation_rate, double_well, dwell_deriv, initial_sav, update_R,
                     v_poly, xi)
from .grid import GridMismatchError, GridSpec, inner_product, l2_norm, mean
from .initial import init_example1, init_example2, init_example3
from .integrators import SCHEMES, Integrator, SchemeConfig, SimulationRecord, run
from .kernel import GaussianKernel, KernelTable, build_table, kernel_eval
from .operator import ShiftedOperator, apply_L_direct, apply_L_fast, apply_shifted
from .solver import (DenseSizeError, DenseSolver, SolverError, StepSystem, apply_system, cg_solve,
                     dense_solve, spectral_solve)

__version__ = "0.1.0"
