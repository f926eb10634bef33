import dataclasses

import numpy as np
from sklearn.preprocessing import StandardScaler

from ..error import MissingField
from ..geo_core import spatial_lag


@dataclasses.dataclass(frozen=True)
class FeatureSpec:
    """Canonical feature order: (g, Wg, h, p) with the spatial lag, (g, h, p) without."""
    use_spatial_lag: bool = False

    @property
    def names(self):
        return FEATURES_WITH_LAG if self.use_spatial_lag else FEATURES_WITHOUT_LAG

    @property
    def n_features(self):
        return len(self.names)

    @property
    def lag_index(self):
        return self.names.index('Wg') if self.use_spatial_lag else None

    def to_dict(self):
        return {'use_spatial_lag': self.use_spatial_lag}

    @classmethod
    def from_dict(cls, data):
        return cls(use_spatial_lag=bool(data['use_spatial_lag']))


@dataclasses.dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    scales: np.ndarray

    @classmethod
    def fit(cls, X):
        scaler = StandardScaler().fit(np.asarray(X, dtype=float))
        return cls(means=scaler.mean_.copy(), scales=scaler.scale_.copy())

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.means) / self.scales

    def inverse_transform(self, X):
        return np.asarray(X, dtype=float) * self.scales + self.means

    def to_dict(self):
        return {'means': self.means.tolist(), 'scales': self.scales.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(means=np.array(data['means'], dtype=float), scales=np.array(data['scales'], dtype=float))


def build_features(network, members, spec: FeatureSpec, lag_members=None):
    """
    Feature rows for `members` in canonical order, plus add-on sales targets (NaN for candidates).

    The spatial lag of each member is taken over `lag_members`, which defaults to the members themselves; pass the
    training sites here to evaluate held-out sites against them.
    """
    members = np.asarray(members, dtype=int).reshape(-1)
    columns = {'g': network.base_sales, 'h': network.field('income'), 'p': network.field('population')}
    for name, values in columns.items():
        missing = np.flatnonzero(np.isnan(values[members]))
        if missing.size:
            raise MissingField(network.sites[members[missing[0]]].id, FIELD_NAMES[name])

    rows = []
    for name in spec.names:
        if name == 'Wg':
            anchors = members if lag_members is None else lag_members
            rows.append(spatial_lag(network.W, network.base_sales, anchors, targets=members))
        else:
            rows.append(columns[name][members])

    X = np.column_stack(rows) if members.size else np.zeros((0, spec.n_features))
    y = network.addon_sales[members]
    return X, y


FEATURES_WITH_LAG = ('g', 'Wg', 'h', 'p')
FEATURES_WITHOUT_LAG = ('g', 'h', 'p')

FIELD_NAMES = {
    'g': 'base_sales',
    'h': 'income',
    'p': 'population',
}
