"""Integral fractional Laplacian on an interval: P1 finite elements, weighted
eigenpairs and critical points of semilinear energy functionals."""

from .assembly import (Mesh1D, WeightField, OperatorPair, assemble_stiffness,
                       assemble_mass, build_operators, oracle_stiffness, export_matrix)
from .spectral import (EigenSet, SpectrumReport, solve_eigen, rayleigh_quotient,
                       deflated_minimize, courant_fischer_check, monotonicity_check,
                       spectrum_report, richardson_limit, export_spectrum)
from .reaction import (Reaction, TruncatedReaction, example_reaction, linear_reaction,
                       table_reaction, truncate, check_hypotheses)
from .variational import (SolverConfig, EnergyModel, CriticalPoint, energy, gradient,
                          hessian, minimize, mountain_pass, newton_multistart, morse_data,
                          classify, export_solutions)
from .errors import (FracMorseError, PreconditionError, AssemblyError, OracleError,
                     SolverError, NonConvergenceError, GeometryError, NumericalDomainError)

__version__ = "0.1.0"
