import numpy as np
from scipy import linalg

from .model import DemandModel
from ..error import SingularDesign


def fit_ols(X, y, feature_spec=None):
    """Least squares with an intercept on raw features; the solution satisfies the normal equations."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    assert X.ndim == 2 and len(X) == len(y), 'expected {} feature rows, found {}'.format(len(y), len(X))
    assert not np.isnan(y).any(), 'OLS targets must all be present'

    design = np.column_stack([np.ones(len(X)), X])
    if len(X) < design.shape[1]:
        raise SingularDesign('{} rows cannot identify {} coefficients'.format(len(X), design.shape[1]))

    coef, _, rank, _ = linalg.lstsq(design, y)
    if rank < design.shape[1]:
        raise SingularDesign('design matrix has rank {} < {}'.format(rank, design.shape[1]))
    return DemandModel(family='ols', feature_spec=feature_spec, coef=coef, n_features=X.shape[1])
