import logging

import numpy as np
import pandas as pd

from .coeffs import derive_linear_coeffs, derive_quadratic_coeffs
from .problem import BlackBox, ExpansionProblem, ExpansionSolution
from .solvers import solve_baseline, solve_exact_quadratic, solve_exhaustive, solve_greedy, solve_sort_topk
from ..demand_models import DemandModel, build_features

logger = logging.getLogger(__name__)


def resolve_solver(model: DemandModel, solver='auto'):
    """`auto`: sort for affine models without the spatial lag, exact for affine models with it, greedy otherwise."""
    assert solver in SOLVER_CHOICES, 'solver should be one of {}, found {}'.format(SOLVER_CHOICES, solver)
    if solver != 'auto':
        return solver
    if model.family == 'radial_svr':
        return 'greedy'
    return 'exact' if model.feature_spec.use_spatial_lag else 'sort'


def build_problem(model: DemandModel, network, K, solver='auto', fixed=None, candidates=None):
    """
    The expansion problem of `network` under `model`, with the objective form `solver` needs: per-site
    coefficients for sort, pairwise coefficients for the other solvers on affine models, and the model itself
    for radial SVRs.
    """
    solver = resolve_solver(model, solver)
    if solver == 'sort':
        objective = derive_linear_coeffs(model, network)
    elif model.family == 'radial_svr':
        objective = BlackBox(model)
    else:
        objective = derive_quadratic_coeffs(model, network)
    return ExpansionProblem(network=network,
                            fixed=network.active if fixed is None else fixed,
                            candidates=network.candidates if candidates is None else candidates,
                            K=K, objective=objective, model=model)


def solve(problem: ExpansionProblem, solver='auto', **kwargs):
    if solver == 'auto':
        assert problem.model is not None, 'the auto rule needs the model behind the problem'
        solver = resolve_solver(problem.model, solver)
    solution = SOLVER_FUNCTIONS[solver](problem, **kwargs)
    logger.info('%s: K=%d, objective %.6g, optimal=%s', solver, problem.K, solution.objective_value,
                solution.optimal)
    return solution


def marginal_table(problem: ExpansionProblem, solution: ExpansionSolution):
    """One row per chosen site in the order the solver added it, with its marginal and the running total."""
    network = problem.network
    z0 = problem.evaluate(())
    table = pd.DataFrame({
        'rank': np.arange(1, len(solution.order) + 1),
        'site_id': [network.ids[i] for i in solution.order],
        'lat': [network.sites[i].lat for i in solution.order],
        'lon': [network.sites[i].lon for i in solution.order],
        'base_sales': network.base_sales[list(solution.order)],
        'marginal': solution.marginals,
        'cumulative': z0 + np.cumsum(solution.marginals),
    })
    if problem.model is not None and problem.model.feature_spec is not None:
        members = problem.members(solution.chosen)
        X, _ = build_features(network, members, problem.model.feature_spec)
        predicted = dict(zip(members.tolist(), problem.model.predict(X)))
        table['predicted'] = [predicted[i] for i in solution.order]
    return table


SOLVER_CHOICES = ('baseline', 'sort', 'exact', 'greedy', 'exhaustive', 'auto')

SOLVER_FUNCTIONS = {
    'baseline': solve_baseline,
    'sort': solve_sort_topk,
    'exact': solve_exact_quadratic,
    'greedy': solve_greedy,
    'exhaustive': solve_exhaustive,
}
