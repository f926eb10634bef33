from .problem import LinearCoeffs, QuadraticCoeffs, BlackBox, ExpansionProblem, ExpansionSolution, SOLVERS
from .coeffs import derive_linear_coeffs, derive_quadratic_coeffs
from .solvers import solve_sort_topk, solve_exhaustive, solve_exact_quadratic, solve_greedy, solve_baseline, MAX_NODES
from .expansion import resolve_solver, build_problem, solve, marginal_table, SOLVER_CHOICES
