import dataclasses
import json
import logging
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .features import FeatureSpec, Standardizer, build_features
from ..error import FeatureDimensionMismatch, NotAffineInFeatures

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class DemandModel:
    """
    A fitted add-on demand predictor.

    `ols` models keep `coef` = (β0, β1, ..., βd) over raw features. SVR models keep the signed dual coefficients
    (α - α*) of their support vectors, the support vectors themselves in standardized feature space, the
    intercept b0 and the standardizer fitted on the training rows, so that

        f(x) = Σ_k dual_k · ker(V_k, standardize(x)) + b0
    """
    family: str
    feature_spec: Optional[FeatureSpec] = None
    coef: Optional[np.ndarray] = None
    dual_coefs: Optional[np.ndarray] = None
    support_vectors: Optional[np.ndarray] = None
    intercept: float = 0.0
    C: Optional[float] = None
    epsilon: Optional[float] = None
    gamma: Optional[float] = None
    standardizer: Optional[Standardizer] = None
    n_features: int = 0
    converged: bool = True
    n_iter: int = 0

    def __post_init__(self):
        assert self.family in FAMILIES, 'family should be one of {}, found {}'.format(FAMILIES, self.family)
        if self.family == 'ols':
            assert self.coef is not None and len(self.coef) == self.n_features + 1, \
                'OLS needs one coefficient per feature plus the intercept'
        else:
            assert self.standardizer is not None, 'SVR models carry the standardizer of their training rows'
            assert len(self.dual_coefs) == len(self.support_vectors), 'one dual coefficient per support vector'

    @property
    def kernel(self):
        return KERNEL_OF_FAMILY[self.family]

    @property
    def hyperparameters(self):
        return {name: getattr(self, name) for name in HYPERPARAMETERS[self.family]}

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise FeatureDimensionMismatch(self.n_features, X.shape[1])

        if self.family == 'ols':
            return self.coef[0] + X @ self.coef[1:]
        if len(self.dual_coefs) == 0:
            return np.full(len(X), float(self.intercept))
        K = kernel_matrix(self.standardizer.transform(X), self.support_vectors, self.kernel, self.gamma)
        return K @ self.dual_coefs + self.intercept

    def scaled(self, factor):
        """Same model with every output multiplied by `factor`."""
        if self.family == 'ols':
            return dataclasses.replace(self, coef=self.coef * factor)
        return dataclasses.replace(self, dual_coefs=self.dual_coefs * factor, intercept=self.intercept * factor)

    def to_dict(self):
        data = {
            'family': self.family,
            'feature_spec': None if self.feature_spec is None else self.feature_spec.to_dict(),
            'n_features': self.n_features,
            'intercept': float(self.intercept),
            'converged': self.converged,
            'n_iter': self.n_iter,
        }
        for name in ('C', 'epsilon', 'gamma'):
            data[name] = None if getattr(self, name) is None else float(getattr(self, name))
        for name in ('coef', 'dual_coefs', 'support_vectors'):
            data[name] = None if getattr(self, name) is None else getattr(self, name).tolist()
        data['standardizer'] = None if self.standardizer is None else self.standardizer.to_dict()
        return data

    @classmethod
    def from_dict(cls, data):
        arrays = {}
        for name in ('coef', 'dual_coefs'):
            arrays[name] = None if data.get(name) is None else np.array(data[name], dtype=float)
        if data.get('support_vectors') is not None:
            arrays['support_vectors'] = np.array(data['support_vectors'], dtype=float).reshape(-1, data['n_features'])
        return cls(family=data['family'],
                   feature_spec=None if data.get('feature_spec') is None else FeatureSpec.from_dict(
                       data['feature_spec']),
                   intercept=data['intercept'],
                   C=data.get('C'), epsilon=data.get('epsilon'), gamma=data.get('gamma'),
                   standardizer=None if data.get('standardizer') is None else Standardizer.from_dict(
                       data['standardizer']),
                   n_features=data['n_features'], converged=data.get('converged', True),
                   n_iter=data.get('n_iter', 0), **arrays)

    def save(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=1)
        logger.info('Saved %s model to %s', self.family, path)

    @classmethod
    def load(cls, path):
        with open(path, encoding='utf-8') as f:
            return cls.from_dict(json.load(f))


def kernel_matrix(A, B, kernel, gamma=None):
    if kernel == 'linear':
        return A @ B.T
    assert gamma is not None and gamma > 0, 'radial kernel needs gamma > 0'
    return np.exp(-gamma * cdist(A, B, 'sqeuclidean'))


def predict_site(model: DemandModel, features):
    """Predicted add-on sales of one site from its raw feature row. Not clipped at zero."""
    features = np.asarray(features, dtype=float).reshape(-1)
    if features.size != model.n_features:
        raise FeatureDimensionMismatch(model.n_features, features.size)
    return float(model.predict(features.reshape(1, -1))[0])


def predict_network(model: DemandModel, network, members):
    """
    Total predicted add-on sales f̂(Ñ) when the add-on is offered at `members`.

    Features are rebuilt for the member set, so the spatial lag of every member only sees the other members.
    """
    assert model.feature_spec is not None, 'network prediction needs a model fitted with a feature spec'
    members = np.asarray(members, dtype=int).reshape(-1)
    if members.size == 0:
        return 0.0
    X, _ = build_features(network, members, model.feature_spec)
    return float(np.sum(model.predict(X)))


def affine_form(model: DemandModel):
    """
    Raw-space (intercept, slopes) of a model that is affine in its features.

    For a linear-kernel SVR the standardization is folded back: with w = Σ_k dual_k V_k in standardized space,
    the raw slopes are w / scale and the intercept is b0 - Σ w · mean / scale.
    """
    if model.family == 'ols':
        return float(model.coef[0]), model.coef[1:].copy()
    if model.family == 'linear_svr':
        w = model.dual_coefs @ model.support_vectors if len(model.dual_coefs) else np.zeros(model.n_features)
        slopes = w / model.standardizer.scales
        return float(model.intercept - slopes @ model.standardizer.means), slopes
    raise NotAffineInFeatures('{} models are not affine in their features'.format(model.family))


FAMILIES = ('ols', 'linear_svr', 'radial_svr')

KERNEL_OF_FAMILY = {
    'ols': None,
    'linear_svr': 'linear',
    'radial_svr': 'radial',
}

HYPERPARAMETERS = {
    'ols': (),
    'linear_svr': ('C', 'epsilon'),
    'radial_svr': ('C', 'epsilon', 'gamma'),
}
