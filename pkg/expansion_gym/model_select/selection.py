import dataclasses
import logging

import pandas as pd

from .cv import CvPlan, CvResult
from .grid import Grid, GridSearchResult, grid_search
from ..demand_models import FAMILIES, DemandModel, FeatureSpec, build_features, fit_model

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class Selection:
    """The chosen predictor P*: family, hyperparameters and feature variant, refit on every active site."""
    family: str
    params: dict
    feature_spec: FeatureSpec
    model: DemandModel
    cv: CvResult
    searches: dict


def resolve_feature_spec(policy, base_sales_p=None, alpha=0.05):
    """`auto` includes the spatial lag iff base sales show significant spatial autocorrelation (p < alpha)."""
    assert policy in FEATURE_POLICIES, 'feature policy should be one of {}, found {}'.format(FEATURE_POLICIES,
                                                                                            policy)
    if policy == 'force-3':
        return FeatureSpec(use_spatial_lag=False)
    if policy == 'force-4':
        return FeatureSpec(use_spatial_lag=True)
    assert base_sales_p is not None, 'auto feature policy needs the base-sales Moran p-value'
    return FeatureSpec(use_spatial_lag=bool(base_sales_p < alpha))


def search_families(network, plan: CvPlan, feature_spec, grids=None, families=FAMILIES, max_extensions=20,
                    **solver_kwargs):
    grids = grids or {}
    searches = {}
    for family in families:
        grid = grids.get(family, Grid.seed_grid(family))
        searches[family] = grid_search(network, family, grid, plan, feature_spec, max_extensions=max_extensions,
                                       **solver_kwargs)
        logger.info('%s (lag=%s): best %s, CV RMSE %.4g', family, feature_spec.use_spatial_lag,
                    searches[family].best_params, searches[family].best.mean_rmse)
    return searches


def select_model(network, plan: CvPlan, feature_spec, grids=None, families=FAMILIES, max_extensions=20,
                 searches=None, **solver_kwargs):
    """
    Picks the family with the lowest CV RMSE and refits it on all active sites with its tuned hyperparameters.
    Near-ties prefer the simpler family: OLS, then linear SVR, then radial SVR.
    """
    if searches is None:
        searches = search_families(network, plan, feature_spec, grids=grids, families=families,
                                   max_extensions=max_extensions, **solver_kwargs)
    lowest = min(search.best.mean_rmse for search in searches.values())
    tolerance = TIE_RTOL * max(abs(lowest), 1.0)
    family = next(family for family in FAMILIES
                  if family in searches and searches[family].best.mean_rmse <= lowest + tolerance)
    search = searches[family]

    model = refit(network, family, search.best_params, feature_spec, **solver_kwargs)
    logger.info('Selected %s %s (lag=%s)', family, search.best_params, feature_spec.use_spatial_lag)
    return Selection(family=family, params=dict(search.best_params), feature_spec=feature_spec, model=model,
                     cv=search.best, searches=searches)


def refit(network, family, params, feature_spec, **solver_kwargs):
    X, y = build_features(network, network.active, feature_spec)
    return fit_model(family, X, y, feature_spec=feature_spec, params=params, **solver_kwargs)


def cv_table(network, plan: CvPlan, grids=None, families=FAMILIES, max_extensions=20, **solver_kwargs):
    """
    Tuned CV results for every family with and without the spatial lag, laid out as rows
    (statistic, feature variant) by columns (family). Also returns the searches keyed by lag flag.
    """
    searches = {}
    for use_lag in (True, False):
        searches[use_lag] = search_families(network, plan, FeatureSpec(use_spatial_lag=use_lag), grids=grids,
                                            families=families, max_extensions=max_extensions, **solver_kwargs)

    rows = {}
    for label, attribute in CV_TABLE_ROWS:
        for use_lag in (True, False):
            variant = '4 features' if use_lag else '3 features'
            rows[(label, variant)] = {family: getattr(searches[use_lag][family].best, attribute)
                                      for family in families}
    table = pd.DataFrame.from_dict(rows, orient='index')[list(families)]
    table.index = pd.MultiIndex.from_tuples(table.index, names=['statistic', 'features'])
    return table, searches


FEATURE_POLICIES = ('auto', 'force-3', 'force-4')

CV_TABLE_ROWS = (
    ('Mean RMSE', 'mean_rmse'),
    ('SD RMSE', 'sd_rmse'),
    ('Mean MAPE', 'mean_mape'),
    ('SD MAPE', 'sd_mape'),
)

TIE_RTOL = 1e-9
