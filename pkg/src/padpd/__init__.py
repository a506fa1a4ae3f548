"""Fully parallel primal-dual splitting for block-separable convex programs."""

from .errors import (AssumptionViolation, ConfigError, ConvergenceError,
                     DivergenceError, GeneratorError, InvalidFunctionError,
                     OracleFailure, PadpdError, ProblemFileError,
                     ProblemShapeError, SubproblemError)
from .prox import (CallableFunction, L1Norm, ProxFunction, QuadraticFunction,
                   ZeroFunction, make_function, prox_l1, prox_numeric_oracle,
                   prox_quadratic, prox_zero)
from .operators import (BlockProblem, SplittingOperator, apply_H, build_operator,
                        lipschitz_bound_blockwise, lipschitz_bound_norm_product,
                        lipschitz_constant, spectral_norm)
from .solver import (IterationRecord, SolveResult, SolverConfig, SolverState,
                     default_eta, frb_step, initial_state, kkt_residual, solve)
from .distributed import (ConsensusProblem, metropolis_weights, make_graph,
                          solve_consensus, validate_weights)
from .baseline import AdmmConfig, admm_direct_multiblock
from .problems import (consensus_least_squares, example1, get_builtin,
                       load_problem, random_qp, save_problem)

__version__ = "0.1.0"
