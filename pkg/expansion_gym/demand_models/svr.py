import dataclasses
import logging

import numpy as np

from .features import Standardizer
from .model import DemandModel, kernel_matrix
from ..error import NonConvergence

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class DualSolution:
    dual_coefs: np.ndarray  # signed α - α*, one per training row
    intercept: float
    n_iter: int
    converged: bool
    violation: float


def fit_svr(X, y, kernel='radial', C=1.0, epsilon=0.1, gamma=None, tol=1e-3, max_iter=10 ** 6, feature_spec=None,
            strict=False):
    """
    ε-SVR on z-score standardized features.

    The returned model keeps only rows with a non-zero dual coefficient. A run that hits `max_iter` returns the
    last iterate with `converged=False` (or raises NonConvergence when `strict`).
    """
    assert kernel in ('linear', 'radial'), 'kernel should be linear or radial, found {}'.format(kernel)
    assert C > 0, 'C should be > 0'
    assert epsilon >= 0, 'epsilon should be >= 0'
    assert kernel == 'linear' or (gamma is not None and gamma > 0), 'radial kernel needs gamma > 0'
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    assert X.ndim == 2 and len(X) == len(y), 'expected {} feature rows, found {}'.format(len(y), len(X))

    standardizer = Standardizer.fit(X)
    Xs = standardizer.transform(X)
    K = kernel_matrix(Xs, Xs, kernel, gamma)
    solution = solve_svr_dual(K, y, C=C, epsilon=epsilon, tol=tol, max_iter=max_iter)

    support = np.flatnonzero(solution.dual_coefs != 0)
    model = DemandModel(family='{}_svr'.format(kernel), feature_spec=feature_spec,
                        dual_coefs=solution.dual_coefs[support], support_vectors=Xs[support],
                        intercept=solution.intercept, C=float(C), epsilon=float(epsilon),
                        gamma=None if kernel == 'linear' else float(gamma), standardizer=standardizer,
                        n_features=X.shape[1], converged=solution.converged, n_iter=solution.n_iter)
    if not solution.converged:
        logger.warning('SVR (%s, C=%g, epsilon=%g, gamma=%s) stopped after %d updates with KKT violation %.3g',
                       kernel, C, epsilon, gamma, solution.n_iter, solution.violation)
        if strict:
            raise NonConvergence(max_iter, model)
    return model


def solve_svr_dual(K, z, C, epsilon, tol=1e-3, max_iter=10 ** 6):
    """
    Two-variable decomposition for the ε-SVR dual over 2n variables α = (α, α*):

        min ½ αᵀQα + pᵀα   s.t.  yᵀα = 0,  0 <= α <= C

    with y = (1, ..., 1, -1, ..., -1), p = (ε - z, ε + z) and Q_st = y_s y_t K_st. Each iteration updates the
    maximal violating pair in closed form; it stops once the pair's violation drops below `tol`.
    """
    K = np.asarray(K, dtype=float)
    z = np.asarray(z, dtype=float).reshape(-1)
    n = len(z)
    y = np.concatenate([np.ones(n), -np.ones(n)])
    rows = np.concatenate([np.arange(n), np.arange(n)])
    diagonal = np.diag(K)

    alpha = np.zeros(2 * n)
    G = np.concatenate([epsilon - z, epsilon + z])  # gradient Qα + p at α = 0

    converged = False
    violation = np.inf
    n_iter = 0
    while n_iter < max_iter:
        i, j, violation = _select_working_pair(alpha, y, G, C)
        if violation < tol:
            converged = True
            break

        Q_i = y[i] * y * K[rows[i], rows]
        Q_j = y[j] * y * K[rows[j], rows]
        old_i, old_j = alpha[i], alpha[j]

        if y[i] != y[j]:
            quad = max(diagonal[rows[i]] + diagonal[rows[j]] + 2 * Q_i[j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            else:
                if alpha[i] < 0:
                    alpha[i], alpha[j] = 0.0, -diff
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, C + diff
        else:
            quad = max(diagonal[rows[i]] + diagonal[rows[j]] - 2 * Q_i[j], TAU)
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            else:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, total
                if alpha[i] < 0:
                    alpha[i], alpha[j] = 0.0, total

        G += Q_i * (alpha[i] - old_i) + Q_j * (alpha[j] - old_j)
        n_iter += 1
        if n_iter % 10000 == 0:
            logger.debug('SVR dual: %d updates, violation %.3g', n_iter, violation)

    dual_coefs = alpha[:n] - alpha[n:]
    return DualSolution(dual_coefs=dual_coefs, intercept=-_rho(alpha, y, G, C), n_iter=n_iter,
                        converged=converged, violation=float(violation))


def dual_objective(K, z, dual_coefs, epsilon):
    """ε-SVR dual objective (minimization form) at β = α - α* when α and α* are complementary."""
    beta = np.asarray(dual_coefs, dtype=float)
    return float(0.5 * beta @ np.asarray(K) @ beta + epsilon * np.abs(beta).sum() - np.asarray(z) @ beta)


def _select_working_pair(alpha, y, G, C):
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    if not up.any() or not low.any():
        return 0, 0, 0.0

    score = -y * G
    i = int(np.argmax(np.where(up, score, -np.inf)))
    j = int(np.argmin(np.where(low, score, np.inf)))
    return i, j, float(score[i] - score[j])


def _rho(alpha, y, G, C):
    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        return float(yG[free].mean())

    ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2)


TAU = 1e-12
