import dataclasses
import logging

import numpy as np
import pandas as pd
from scipy.stats import norm

from ..demand_models.ols import fit_ols
from ..error import ConstantVector, EmptyWeights
from ..seeding import np_random

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class MoranResult:
    I: float
    expected_I: float
    variance_I: float
    z: float
    p_value: float
    method: str = 'analytic'
    permutations: int = 0
    alternative: str = 'greater'

    def is_significant(self, alpha=0.05):
        return self.p_value < alpha


def morans_i(W, x):
    """
    Global Moran's I of `x` under raw weights `W`:

        I = n / Σ_ij w_ij · Σ_ij w_ij (x_i - x̄)(x_j - x̄) / Σ_i (x_i - x̄)^2
    """
    W, x = _check_inputs(W, x)
    n = x.size
    if n == 2:
        # any non-constant pair is perfectly anti-correlated
        return -1.0

    z = x - x.mean()
    return n / W.sum() * (z @ W @ z) / (z @ z)


def morans_test_analytic(W, x, alternative='greater', assumption='normality'):
    """
    Moran's I test with the analytic moments of I under the null of no spatial autocorrelation.

    `normality` treats x as normally distributed; `randomization` (the `moran.test` default elsewhere) uses the
    sample kurtosis of x and needs n >= 4.
    """
    assert alternative in ALTERNATIVES, 'alternative should be one of {}'.format(ALTERNATIVES)
    assert assumption in ASSUMPTIONS, 'assumption should be one of {}'.format(ASSUMPTIONS)
    W, x = _check_inputs(W, x)
    n = x.size
    assert n >= 3, 'analytic Moran test needs at least 3 observations, found {}'.format(n)

    I = morans_i(W, x)
    s0, s1, s2 = _weight_sums(W)
    expected = -1.0 / (n - 1)
    if assumption == 'normality':
        variance = (n * n * s1 - n * s2 + 3 * s0 * s0) / ((n - 1) * (n + 1) * s0 * s0) - expected ** 2
    else:
        assert n >= 4, 'randomization variance needs at least 4 observations, found {}'.format(n)
        z = x - x.mean()
        b2 = n * np.sum(z ** 4) / np.sum(z ** 2) ** 2
        numerator = n * ((n * n - 3 * n + 3) * s1 - n * s2 + 3 * s0 * s0) \
            - b2 * ((n * n - n) * s1 - 2 * n * s2 + 6 * s0 * s0)
        variance = numerator / ((n - 1) * (n - 2) * (n - 3) * s0 * s0) - expected ** 2

    z_score = (I - expected) / np.sqrt(variance)
    if alternative == 'greater':
        p_value = norm.sf(z_score)
    else:
        p_value = 2 * norm.sf(abs(z_score))
    return MoranResult(I=float(I), expected_I=expected, variance_I=float(variance), z=float(z_score),
                       p_value=float(np.clip(p_value, 0.0, 1.0)), method='analytic', alternative=alternative)


def morans_test_permutation(W, x, permutations=999, seed=None, alternative='greater'):
    """
    Conditional randomization test: x is relabelled across sites `permutations` times.

    One-sided p = (1 + #{I_perm >= I}) / (1 + permutations). The reported moments are those of the permutation
    distribution. Relabelling is drawn from the `permutation` sub-stream of `seed`.
    """
    assert permutations >= 99, 'use at least 99 permutations, found {}'.format(permutations)
    assert alternative in ALTERNATIVES, 'alternative should be one of {}'.format(ALTERNATIVES)
    W, x = _check_inputs(W, x)
    n = x.size

    observed = morans_i(W, x)
    rng = np_random(seed, stream='permutation')
    order = np.stack([rng.permutation(n) for _ in range(permutations)])

    z = x - x.mean()
    z_perm = z[order]
    simulated = n / W.sum() * np.sum((z_perm @ W) * z_perm, axis=1) / (z @ z)

    slack = PERMUTATION_TIE_TOL * max(1.0, abs(observed))
    if alternative == 'greater':
        extreme = np.sum(simulated >= observed - slack)
    else:
        center = -1.0 / (n - 1)
        extreme = np.sum(np.abs(simulated - center) >= abs(observed - center) - slack)
    p_value = (1.0 + extreme) / (1.0 + permutations)

    mean, variance = simulated.mean(), simulated.var()
    z_score = (observed - mean) / np.sqrt(variance) if variance > 0 else np.nan
    return MoranResult(I=float(observed), expected_I=float(mean), variance_I=float(variance), z=float(z_score),
                       p_value=float(min(p_value, 1.0)), method='permutation', permutations=permutations,
                       alternative=alternative)


def residual_moran(W, y, X, permutations=999, seed=None, alternative='greater'):
    """Permutation Moran test on the residuals of an OLS fit of y on X (intercept added)."""
    y = np.asarray(y, dtype=float)
    model = fit_ols(X, y)
    residuals = y - model.predict(X)

    if np.ptp(residuals) <= RESIDUAL_ZERO_TOL * max(1.0, np.abs(y).max()):
        raise ConstantVector('regression residuals are identically zero; y is exactly linear in X')
    return morans_test_permutation(W, residuals, permutations=permutations, seed=seed, alternative=alternative)


def moran_table(network, permutations=999, seed=None, alternative='greater', assumption='normality'):
    """
    Moran tests over the active sites: analytic tests for base and add-on sales, and the permutation test on the
    residuals of add-on sales regressed on base sales.
    """
    active = np.asarray(network.active, dtype=int)
    W = network.W[np.ix_(active, active)]
    g = network.base_sales[active]
    a = network.addon_sales[active]

    results = {
        'base_sales': morans_test_analytic(W, g, alternative=alternative, assumption=assumption),
        'addon_sales': morans_test_analytic(W, a, alternative=alternative, assumption=assumption),
        'residuals': residual_moran(W, a, g.reshape(-1, 1), permutations=permutations, seed=seed,
                                    alternative=alternative),
    }
    for name, result in results.items():
        logger.info('Moran %s: I=%.4f z=%.3f p=%.4g (%s)', name, result.I, result.z, result.p_value, result.method)
    return pd.DataFrame([dataclasses.asdict(result) for result in results.values()], index=list(results))


def autocorrelation_inherited(table, alpha=0.05):
    """Add-on sales are clustered but their residuals on base sales are not: the clustering comes from g."""
    return bool(table.loc['addon_sales', 'p_value'] < alpha and table.loc['residuals', 'p_value'] >= alpha)


def _check_inputs(W, x):
    W = np.asarray(W, dtype=float)
    x = np.asarray(x, dtype=float).reshape(-1)
    assert x.size >= 2, 'Moran statistic needs at least 2 observations'
    assert W.shape == (x.size, x.size), 'weights shape {} does not match {} observations'.format(W.shape, x.size)

    if np.ptp(x) == 0:
        raise ConstantVector('variable is constant; Moran statistic is undefined')
    if W.sum() == 0:
        raise EmptyWeights('weights sum to zero')
    return W, x


def _weight_sums(W):
    s0 = W.sum()
    s1 = 0.5 * np.sum((W + W.T) ** 2)
    s2 = np.sum((W.sum(axis=1) + W.sum(axis=0)) ** 2)
    return s0, s1, s2


ALTERNATIVES = ('greater', 'two-sided')
ASSUMPTIONS = ('normality', 'randomization')

PERMUTATION_TIE_TOL = 1e-12
RESIDUAL_ZERO_TOL = 1e-9
