import dataclasses
import logging
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from ..error import DuplicateCoordinates, MissingSales

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Site:
    """
    One base-product retail location.

    Active sites currently sell the add-on product and therefore carry observed base sales `g` and add-on
    sales `a`. Candidate sites only sell the base product; their `g` is unknown until it is provided or
    simulated, and they never carry `a`.
    """
    id: str
    lat: float
    lon: float
    status: str = 'active'
    base_sales: Optional[float] = None
    addon_sales: Optional[float] = None
    income: Optional[float] = None
    population: Optional[float] = None

    def __post_init__(self):
        assert self.status in SITE_STATUS, 'status should be one of {}, found {}'.format(SITE_STATUS, self.status)
        assert -90 <= self.lat <= 90, 'latitude of {} should be in [-90, 90]'.format(self.id)
        assert -180 <= self.lon <= 180, 'longitude of {} should be in [-180, 180]'.format(self.id)
        for field in ('base_sales', 'addon_sales', 'income', 'population'):
            value = getattr(self, field)
            assert value is None or value >= 0, '{} of {} should be non-negative'.format(field, self.id)
        if self.is_active:
            assert self.base_sales is not None and self.addon_sales is not None, \
                'active site {} must carry base and add-on sales'.format(self.id)
        else:
            assert self.addon_sales is None, 'candidate site {} cannot carry add-on sales'.format(self.id)

    @property
    def is_active(self):
        return self.status == 'active'


class Network:
    """
    The full site collection N = S ∪ S̃ with its pairwise distance matrix D (miles) and the raw inverse-distance
    weight matrix W. Both matrices are computed once and are read-only afterwards.
    """

    def __init__(self, sites: Sequence[Site], distance_metric: str = 'haversine'):
        assert len(sites) >= 2, 'a network needs at least two sites, found {}'.format(len(sites))
        ids = [site.id for site in sites]
        assert len(set(ids)) == len(ids), 'site ids must be unique within a network'

        self.sites = tuple(sites)
        self.distance_metric = distance_metric
        self.D = distance_matrix(self.sites, distance_metric)
        self.W = weight_matrix(self.D)
        self.D.setflags(write=False)
        self.W.setflags(write=False)
        self._index = {site_id: i for i, site_id in enumerate(ids)}

    def __len__(self):
        return len(self.sites)

    def __repr__(self):
        return 'Network(n={}, active={}, candidates={}, metric={})'.format(
            len(self), len(self.active), len(self.candidates), self.distance_metric)

    @property
    def ids(self):
        return tuple(site.id for site in self.sites)

    @property
    def active(self):
        return tuple(i for i, site in enumerate(self.sites) if site.is_active)

    @property
    def candidates(self):
        return tuple(i for i, site in enumerate(self.sites) if not site.is_active)

    def index_of(self, site_id):
        return self._index[site_id]

    def field(self, name):
        """Per-site values of a numeric field as a float vector, NaN where absent."""
        return np.array([np.nan if getattr(site, name) is None else getattr(site, name) for site in self.sites],
                        dtype=float)

    @property
    def base_sales(self):
        return self.field('base_sales')

    @property
    def addon_sales(self):
        return self.field('addon_sales')

    @property
    def coordinates(self):
        return np.array([[site.lat, site.lon] for site in self.sites], dtype=float)

    def with_base_sales(self, values: Mapping[int, float]):
        """Returns a copy whose sites at the given indices carry new base sales; D and W are shared."""
        sites = list(self.sites)
        for i, value in values.items():
            sites[i] = dataclasses.replace(sites[i], base_sales=float(value))

        clone = object.__new__(Network)
        clone.sites = tuple(sites)
        clone.distance_metric = self.distance_metric
        clone.D = self.D
        clone.W = self.W
        clone._index = self._index
        return clone

    def summary(self):
        """Mean and standard deviation of g, a, D, h and p over the active and the candidate sets."""
        rows = {}
        for label, members in (('S', self.active), ('S~', self.candidates)):
            members = np.asarray(members, dtype=int)
            columns = {
                'g': self.base_sales[members],
                'a': self.addon_sales[members],
                'D': self.D[np.ix_(members, members)][np.triu_indices(len(members), k=1)],
                'h': self.field('income')[members],
                'p': self.field('population')[members],
            }
            for name, values in columns.items():
                values = values[~np.isnan(values)]
                rows.setdefault(name, {})
                rows[name][(label, 'mean')] = values.mean() if values.size else np.nan
                rows[name][(label, 'sd')] = values.std(ddof=1) if values.size > 1 else np.nan
        table = pd.DataFrame.from_dict(rows, orient='index')
        table.columns = pd.MultiIndex.from_tuples(table.columns)
        return table


def distance_matrix(sites: Sequence[Site], metric: str = 'haversine'):
    """
    Pairwise distances in miles.

    `haversine` is the great-circle distance on a sphere of mean Earth radius; `euclidean_degrees` is the straight
    line in the (lat, lon) plane scaled by a fixed number of miles per degree.
    """
    assert metric in DISTANCE_METRICS, 'metric should be one of {}, found {}'.format(DISTANCE_METRICS, metric)
    assert len(sites) >= 2, 'distance matrix needs at least two sites'

    coords = np.array([[site.lat, site.lon] for site in sites], dtype=float)
    if metric == 'haversine':
        lat, lon = np.radians(coords[:, 0]), np.radians(coords[:, 1])
        d_lat = lat[:, None] - lat[None, :]
        d_lon = lon[:, None] - lon[None, :]
        a = np.sin(d_lat / 2) ** 2 + np.cos(lat[:, None]) * np.cos(lat[None, :]) * np.sin(d_lon / 2) ** 2
        D = 2 * EARTH_RADIUS_MILES * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))
    else:
        D = cdist(coords, coords) * MILES_PER_DEGREE

    D = (D + D.T) / 2
    np.fill_diagonal(D, 0.0)

    i, j = np.nonzero(np.triu(D == 0, k=1))
    if i.size:
        raise DuplicateCoordinates(int(i[0]), int(j[0]))
    return D


def weight_matrix(D):
    """Raw inverse-distance weights, w_ij = 1 / d_ij off the diagonal and 0 on it. No row standardization."""
    D = np.asarray(D, dtype=float)
    assert D.ndim == 2 and D.shape[0] == D.shape[1], 'distance matrix should be square'
    off_diagonal = ~np.eye(len(D), dtype=bool)
    W = np.zeros_like(D)
    np.divide(1.0, D, out=W, where=off_diagonal)
    return W


def spatial_lag(W, g, members, targets=None):
    """
    Spatial lag of base sales over the selected sites only.

    Entry k is Σ_{j ∈ members, j ≠ t_k} w_{t_k j} g_j for the k-th target t_k. Targets default to the members
    themselves; passing other targets evaluates sites against a set they are not part of (e.g. a held-out site
    against the training sites).
    """
    members = np.asarray(members, dtype=int).reshape(-1)
    targets = members if targets is None else np.asarray(targets, dtype=int).reshape(-1)
    g_members = np.asarray(g, dtype=float)[members]

    missing = np.flatnonzero(np.isnan(g_members))
    if missing.size:
        raise MissingSales(int(members[missing[0]]))
    if members.size == 0:
        return np.zeros(targets.size)
    # W has a zero diagonal, so a target that is also a member drops out of its own sum
    return np.asarray(W)[np.ix_(targets, members)] @ g_members


EARTH_RADIUS_MILES = 3958.8
MILES_PER_DEGREE = 69.0

DISTANCE_METRICS = ('haversine', 'euclidean_degrees')
SITE_STATUS = ('active', 'candidate')
