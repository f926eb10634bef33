import dataclasses
import logging
from typing import Tuple

import numpy as np

from ..error import NoActiveSites
from ..geo_core import Network, Site, weight_matrix, distance_matrix
from ..seeding import np_random

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class SimConfig:
    """Simulated-demand sweep: σ = 4^s for every s, `draws_per_sigma` draws each, budgets K = 1..K_max."""
    s_values: Tuple[float, ...] = (2, 4, 6)
    draws_per_sigma: int = 10
    K_max: int = 20
    seed: int = 0

    def __post_init__(self):
        assert all(s >= 0 for s in self.s_values), 's values should be >= 0'
        assert self.draws_per_sigma >= 1, 'draws_per_sigma should be >= 1'
        assert self.K_max >= 1, 'K_max should be >= 1'

    @staticmethod
    def sigma(s):
        return 4.0 ** s


def simulate_candidate_demand(network, sigma, seed=None, mu=None):
    """
    Base sales for every candidate (in `network.candidates` order), i.i.d. normal with mean `mu` (default: mean
    active base sales) and sd `sigma`. Draws below the smallest active base sales are raised to it.
    """
    assert sigma >= 0, 'sigma should be >= 0, found {}'.format(sigma)
    active = np.asarray(network.active, dtype=int)
    if active.size == 0:
        raise NoActiveSites('simulating candidate demand needs active sites with base sales')
    g = network.base_sales[active]
    mu = float(np.mean(g)) if mu is None else mu

    rng = np_random(seed, stream='simulation')
    draws = rng.normal(mu, sigma, size=len(network.candidates)) if sigma > 0 \
        else np.full(len(network.candidates), mu)
    floor = float(np.min(g))
    at_floor = draws < floor
    draws[at_floor] = floor
    logger.debug('Simulated %d candidates (mu=%.4g, sigma=%.4g), %d at the floor', draws.size, mu, sigma,
                 int(at_floor.sum()))
    return draws


def make_synthetic_region(n_active=90, n_candidates=230, spatial=True, seed=0, n_clusters=6, center=(34.0, -84.0)):
    """
    A seeded synthetic region with heterogeneous demographics.

    Sites scatter around `n_clusters` town centres. With `spatial=True`, base sales follow a smooth field peaking at
    some of the centres, so nearby sites sell alike, and add-on sales also respond to the spatial lag of base sales.
    Otherwise base sales are i.i.d. and independent of position. Every site carries base sales, income (thousands)
    and population (thousands); active sites also carry add-on sales.
    """
    assert n_active >= 2 and n_candidates >= 1, 'a region needs at least two active sites and one candidate'
    rng = np_random(seed, stream='synthetic')
    n = n_active + n_candidates

    centres = rng.uniform(-SPAN_MILES / 2, SPAN_MILES / 2, size=(n_clusters, 2))
    membership = rng.randint(0, n_clusters, size=n)
    offsets = centres[membership] + rng.normal(0.0, CLUSTER_SPREAD_MILES, size=(n, 2))
    lat = center[0] + offsets[:, 1] / MILES_PER_DEGREE_LAT
    lon = center[1] + offsets[:, 0] / (MILES_PER_DEGREE_LAT * np.cos(np.radians(center[0])))

    if spatial:
        hot = centres[rng.permutation(n_clusters)[:max(1, n_clusters // 2)]]
        squared = ((offsets[:, None, :] - hot[None, :, :]) ** 2).sum(axis=2)
        field = np.exp(-squared / (2 * FIELD_LENGTH_MILES ** 2)).sum(axis=1)
        g = 1500.0 + 2500.0 * field + rng.normal(0.0, 150.0, size=n)
    else:
        g = rng.normal(2500.0, 700.0, size=n)
    g = np.maximum(g, 100.0)
    income = np.maximum(rng.normal(55.0, 12.0, size=n), 15.0)
    population = np.maximum(rng.normal(8.0, 3.0, size=n), 0.5)

    status = np.array(['active'] * n_active + ['candidate'] * n_candidates)
    rng.shuffle(status)
    active = np.flatnonzero(status == 'active')

    addon = 20.0 + 0.06 * g + 2.0 * income + 6.0 * population + rng.normal(0.0, 10.0, size=n)
    if spatial:
        coords = [Site(id=str(k), lat=float(lat[k]), lon=float(lon[k]), status='candidate') for k in active]
        W = weight_matrix(distance_matrix(coords))
        addon[active] += LAG_EFFECT * (W @ g[active])
    addon = np.maximum(addon, 1.0)

    sites, counters = [], {'active': 0, 'candidate': 0}
    for k in range(n):
        counters[status[k]] += 1
        prefix = 'A' if status[k] == 'active' else 'C'
        sites.append(Site(id='{}{:04d}'.format(prefix, counters[status[k]]), lat=round(float(lat[k]), 6),
                          lon=round(float(lon[k]), 6), status=str(status[k]), base_sales=round(float(g[k]), 2),
                          addon_sales=round(float(addon[k]), 2) if status[k] == 'active' else None,
                          income=round(float(income[k]), 3), population=round(float(population[k]), 3)))
    logger.info('Synthetic region: %d active, %d candidates, spatial=%s, seed=%s', n_active, n_candidates,
                spatial, seed)
    return Network(sites)


SPAN_MILES = 120.0
CLUSTER_SPREAD_MILES = 8.0
FIELD_LENGTH_MILES = 15.0
MILES_PER_DEGREE_LAT = 69.0
LAG_EFFECT = 0.004
