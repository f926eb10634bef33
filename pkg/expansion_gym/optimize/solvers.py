import dataclasses
import itertools
import logging
import math
import time

import numpy as np

from .problem import BlackBox, ExpansionProblem, ExpansionSolution, LinearCoeffs
from ..envs.site_expansion import SiteExpansion
from ..error import MissingSales, NotAffineInFeatures, TimeLimit
from ..wrappers import Monitor

logger = logging.getLogger(__name__)


def solve_sort_topk(problem: ExpansionProblem):
    """Exact for additive objectives: the K candidates with the largest l_i, ties by ascending site id."""
    assert isinstance(problem.objective, LinearCoeffs), 'sort needs a linear objective, found {}'.format(
        problem.kind)
    candidates = np.asarray(problem.candidates)
    order = np.lexsort((problem.id_rank(candidates), -problem.objective.l[candidates]))
    return _solution(problem, candidates[order[:problem.K]], 'sort', optimal=True)


def solve_exhaustive(problem: ExpansionProblem, limit=None):
    """
    Enumerates every K-subset of the candidates. Among equal objectives the first subset in ascending-id
    lexicographic order wins. Coefficient objectives are scored in vectorized chunks; black boxes one set at a time.
    """
    candidates = _by_id(problem)
    n_sets = math.comb(len(candidates), problem.K)
    if limit is not None:
        assert n_sets <= limit, '{} subsets exceed the enumeration limit {}'.format(n_sets, limit)
    logger.debug('Enumerating %d subsets of %d candidates', n_sets, len(candidates))

    combinations = itertools.combinations(range(len(candidates)), problem.K)
    best_value, best = -np.inf, None
    if isinstance(problem.objective, BlackBox):
        for subset in combinations:
            value = problem.evaluate(candidates[list(subset)])
            if value > best_value:
                best_value, best = value, subset
    else:
        _, a, P = _reduce(problem, candidates)
        rows, cols = np.triu_indices(problem.K, k=1)
        while True:
            chunk = np.array(list(itertools.islice(combinations, ENUMERATION_CHUNK)), dtype=int)
            if chunk.size == 0:
                break
            values = a[chunk].sum(axis=1)
            if rows.size:
                values += P[chunk[:, rows], chunk[:, cols]].sum(axis=1)
            k = int(np.argmax(values))
            if values[k] > best_value:
                best_value, best = values[k], tuple(chunk[k])

    return _solution(problem, candidates[list(best)], 'exhaustive', optimal=True, stats={'subsets': n_sets})


def solve_exact_quadratic(problem: ExpansionProblem, time_limit=None, strict=False, exhaustive_limit=None,
                          max_nodes=None):
    """
    Exact maximizer of Σ l_i x_i + Σ_{i ≠ j} e_ij x_i x_j with the fixed sites forced in and K candidates chosen.

    Small instances (at most `exhaustive_limit` subsets) are enumerated. Larger ones run a depth-first
    branch-and-bound over candidate inclusion, seeded with the greedy solution. The bound gives every undecided
    candidate j the optimistic marginal

        u_j = a_j + Σ_{i chosen} P_ij + ½ · (sum of the r - 1 largest positive P_jk over undecided k)

    and adds the r largest u_j to the current value, r being the number of slots left.

    The search visits at most `max_nodes` nodes (default MAX_NODES; 0 means no limit), so a capped run repeats
    node for node. When the node budget or `time_limit` seconds run out first, the best incumbent is returned
    with `optimal=False`, or TimeLimit is raised carrying it if `strict`.
    """
    if isinstance(problem.objective, BlackBox):
        raise NotAffineInFeatures('the exact solver needs linear or quadratic coefficients')
    exhaustive_limit = EXHAUSTIVE_LIMIT if exhaustive_limit is None else exhaustive_limit

    n_sets = math.comb(len(problem.candidates), problem.K)
    if n_sets <= exhaustive_limit:
        solution = solve_exhaustive(problem)
        return dataclasses.replace(solution, solver='exact', stats={'method': 'exhaustive', 'subsets': n_sets})

    candidates = _by_id(problem)
    _, a, P = _reduce(problem, candidates)
    incumbent = solve_greedy(problem)
    position = {site: k for k, site in enumerate(candidates)}
    picked = [position[site] for site in incumbent.chosen]

    max_nodes = MAX_NODES if max_nodes is None else max_nodes
    search = _BranchAndBound(a, P, problem.K, time_limit, max_nodes or None)
    best = search.run(picked)
    optimal = search.stopped is None
    solution = _solution(problem, candidates[best], 'exact', optimal=optimal,
                         stats={'method': 'branch_and_bound', 'nodes': search.nodes})
    logger.info('Branch and bound: %d nodes, objective %.6g%s', search.nodes, solution.objective_value,
                '' if optimal else ' ({}, not proven optimal)'.format(search.stopped))
    if not optimal:
        logger.warning('Exact solver hit its %s after %d nodes; keeping the best incumbent', search.stopped,
                       search.nodes)
        if strict:
            raise TimeLimit(solution, reason=search.stopped)
    return solution


class _BranchAndBound:
    """Subset search over positions sorted by descending a; values exclude the constant base."""

    def __init__(self, a, P, K, time_limit=None, max_nodes=None):
        self.order = np.lexsort((np.arange(len(a)), -a))
        self.a = a[self.order]
        self.P = P[np.ix_(self.order, self.order)]
        self.P_pos = np.maximum(self.P, 0.0)
        self.K = K
        self.m = len(a)
        self.deadline = None if time_limit is None else time.monotonic() + time_limit
        self.max_nodes = max_nodes
        self.stopped = None
        self.nodes = 0

    def run(self, incumbent):
        inverse = np.argsort(self.order)
        best = [int(inverse[k]) for k in incumbent]
        best_value = self.a[best].sum() + self.P[np.ix_(best, best)].sum() / 2

        # (position, chosen, value, link) with link_j = Σ_{i chosen} P_ij
        stack = [(0, (), 0.0, np.zeros(self.m))]
        while stack:
            if self.max_nodes is not None and self.nodes >= self.max_nodes:
                self.stopped = 'node limit'
                break
            self.nodes += 1
            if self.deadline is not None and time.monotonic() >= self.deadline:
                self.stopped = 'time limit'
                break
            pos, chosen, value, link = stack.pop()
            r = self.K - len(chosen)
            if r == 0:
                if value > best_value:
                    best_value, best = value, list(chosen)
                continue
            if self.m - pos < r:
                continue
            if self._bound(pos, r, value, link) <= best_value + BOUND_TOL * max(1.0, abs(best_value)):
                continue
            stack.append((pos + 1, chosen, value, link))
            stack.append((pos + 1, chosen + (pos,), value + self.a[pos] + link[pos], link + self.P[pos]))

        return self.order[best]

    def _bound(self, pos, r, value, link):
        u = self.a[pos:] + link[pos:]
        if r > 1:
            block = self.P_pos[pos:, pos:]
            width = block.shape[1]
            if r - 1 < width:
                top = np.partition(block, width - (r - 1), axis=1)[:, width - (r - 1):].sum(axis=1)
            else:
                top = block.sum(axis=1)
            u = u + 0.5 * top
        return value + np.partition(u, len(u) - r)[len(u) - r:].sum()


def solve_greedy(problem: ExpansionProblem, directory=None):
    """
    K rounds of one-step look-ahead on the SiteExpansion environment: every round adds the candidate with the
    largest marginal increase of f̂, ties by ascending site id. Exact only for K = 1 and additive objectives.
    """
    env = Monitor(SiteExpansion(problem, reward='marginal'), directory=directory)
    ranks = problem.id_rank(problem.candidates)
    env.reset()
    done = False
    while not done:
        gains = env.unwrapped.marginal_gains()
        action = int(np.lexsort((ranks, -gains))[0])
        _, _, done, _ = env.step(action)
    env.close()

    steps = env.episode()
    return _solution(problem, [step['site'] for step in steps], 'greedy', optimal=problem.K == 1,
                     marginals=[step['marginal'] for step in steps])


def solve_baseline(problem: ExpansionProblem):
    """The K candidates with the highest base-product sales, ties by ascending site id, scored by the problem."""
    candidates = np.asarray(problem.candidates)
    g = problem.network.base_sales[candidates]
    missing = np.flatnonzero(np.isnan(g))
    if missing.size:
        raise MissingSales(int(candidates[missing[0]]))
    order = np.lexsort((problem.id_rank(candidates), -g))
    return _solution(problem, candidates[order[:problem.K]], 'baseline', optimal=False)


def _by_id(problem):
    candidates = np.asarray(problem.candidates)
    return candidates[np.argsort(problem.id_rank(candidates), kind='stable')]


def _reduce(problem, candidates):
    """
    Objective over candidate subsets T as base + Σ_{c ∈ T} a_c + Σ_{c < d ∈ T} P_cd, with the fixed sites folded
    into `base` and `a`.
    """
    fixed = np.asarray(problem.fixed, dtype=int)
    objective = problem.objective
    if isinstance(objective, LinearCoeffs):
        return float(objective.l[fixed].sum()), objective.l[candidates].copy(), \
            np.zeros((len(candidates), len(candidates)))
    l, E = objective.l, objective.E
    base = float(l[fixed].sum() + E[np.ix_(fixed, fixed)].sum())
    a = l[candidates] + E[np.ix_(fixed, candidates)].sum(axis=0) + E[np.ix_(candidates, fixed)].sum(axis=1)
    block = E[np.ix_(candidates, candidates)]
    return base, a, block + block.T


def _solution(problem, order, solver, optimal, marginals=None, stats=None):
    order = tuple(int(i) for i in order)
    if marginals is None:
        marginals, previous = [], problem.evaluate(())
        for k in range(1, len(order) + 1):
            current = problem.evaluate(order[:k])
            marginals.append(current - previous)
            previous = current
    return ExpansionSolution(chosen=tuple(sorted(order)), objective_value=problem.evaluate(order), solver=solver,
                             optimal=optimal, order=order, marginals=tuple(float(m) for m in marginals),
                             stats=stats or {})


EXHAUSTIVE_LIMIT = 10 ** 6
ENUMERATION_CHUNK = 2 ** 16
BOUND_TOL = 1e-12
MAX_NODES = 5000
