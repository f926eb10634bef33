import logging

import numpy as np

from .problem import LinearCoeffs, QuadraticCoeffs
from ..demand_models import DemandModel, FeatureSpec, affine_form, build_features
from ..error import NotAffineInFeatures, SpatialModelNotLinearizable

logger = logging.getLogger(__name__)


def derive_linear_coeffs(model: DemandModel, network):
    """
    Per-site predictions l_i = β0 + β1 g_i + β3 h_i + β4 p_i of a model without spatial lag, so that f̂ is additive
    and the best expansion is a sort. Standardization of linear SVRs is folded into the raw-space slopes.
    """
    if model.family == 'radial_svr':
        raise SpatialModelNotLinearizable('radial SVR predictions are not additive over sites')
    if model.feature_spec is None or model.feature_spec.use_spatial_lag:
        raise SpatialModelNotLinearizable('models with a spatial-lag feature give a quadratic objective')

    intercept, slopes = affine_form(model)
    X = _site_features(network)
    return LinearCoeffs(l=intercept + X @ slopes)


def derive_quadratic_coeffs(model: DemandModel, network):
    """
    (l, E) with f̂(Ñ) = Σ_{i ∈ Ñ} l_i + Σ_{i ≠ j ∈ Ñ} e_ij for an affine model.

    With β2' the raw-space slope on the Wg feature, e_ij = β2' g_j / d_ij is what site j's base sales add to site
    i's prediction through i's spatial lag. Models without the lag give E = 0.
    """
    if model.family == 'radial_svr':
        raise NotAffineInFeatures('radial SVR predictions are not affine in the features')

    intercept, slopes = affine_form(model)
    spec = model.feature_spec or FeatureSpec(use_spatial_lag=model.n_features == 4)
    X = _site_features(network)
    g = X[:, 0]
    if spec.use_spatial_lag:
        lag_slope = slopes[spec.lag_index]
        slopes = np.delete(slopes, spec.lag_index)
        E = lag_slope * np.asarray(network.W) * g[None, :]
    else:
        E = np.zeros((len(network), len(network)))
    logger.debug('Quadratic coefficients over %d sites, lag slope %s', len(network),
                 lag_slope if spec.use_spatial_lag else 0.0)
    return QuadraticCoeffs(l=intercept + X @ slopes, E=E)


def _site_features(network):
    X, _ = build_features(network, np.arange(len(network)), FeatureSpec(use_spatial_lag=False))
    return X
