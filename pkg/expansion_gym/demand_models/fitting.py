from .model import FAMILIES, KERNEL_OF_FAMILY
from .ols import fit_ols
from .svr import fit_svr


def fit_model(family, X, y, feature_spec=None, params=None, **solver_kwargs):
    """Fits one of the three model families; `params` holds the SVR hyperparameters (C, epsilon, gamma)."""
    assert family in FAMILIES, 'family should be one of {}, found {}'.format(FAMILIES, family)
    params = dict(params or {})
    if family == 'ols':
        return fit_ols(X, y, feature_spec=feature_spec)
    return fit_svr(X, y, kernel=KERNEL_OF_FAMILY[family], C=params.get('C', 1.0),
                   epsilon=params.get('epsilon', 0.1), gamma=params.get('gamma'), feature_spec=feature_spec,
                   **solver_kwargs)
