import dataclasses
import logging
from typing import Optional, Tuple, Union

import numpy as np

from ..demand_models import DemandModel, predict_network

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class LinearCoeffs:
    """Additive objective f(Ñ) = Σ_{i ∈ Ñ} l_i; `l` is indexed by network position."""
    l: np.ndarray


@dataclasses.dataclass(frozen=True, eq=False)
class QuadraticCoeffs:
    """f(Ñ) = Σ_{i ∈ Ñ} l_i + Σ_{i, j ∈ Ñ, i ≠ j} e_ij over all network positions; `E` has a zero diagonal."""
    l: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        assert self.E.shape == (len(self.l), len(self.l)), 'E should be square over the network'
        assert np.all(np.diag(self.E) == 0), 'E should have a zero diagonal'


@dataclasses.dataclass(frozen=True, eq=False)
class BlackBox:
    """f(Ñ) evaluated by the model itself through `predict_network`."""
    model: DemandModel


Objective = Union[LinearCoeffs, QuadraticCoeffs, BlackBox]


@dataclasses.dataclass(frozen=True, eq=False)
class ExpansionProblem:
    """
    Choose K of the candidate sites to open the add-on at, maximizing the predicted total add-on sales of
    the fixed sites S together with the chosen ones. Sites are network positions.
    """
    network: object
    fixed: Tuple[int, ...]
    candidates: Tuple[int, ...]
    K: int
    objective: Objective
    model: Optional[DemandModel] = None

    def __post_init__(self):
        assert not set(self.fixed) & set(self.candidates), 'fixed and candidate sites should be disjoint'
        assert 1 <= self.K <= len(self.candidates), \
            'K should be in [1, {}], found {}'.format(len(self.candidates), self.K)
        object.__setattr__(self, 'fixed', tuple(int(i) for i in self.fixed))
        object.__setattr__(self, 'candidates', tuple(int(i) for i in self.candidates))

    @property
    def kind(self):
        return OBJECTIVE_KINDS[type(self.objective)]

    def id_rank(self, sites):
        """Rank of each site's id among all network ids; ties everywhere are broken by ascending id."""
        ranks = np.argsort(np.argsort(np.array(self.network.ids, dtype=object), kind='stable'), kind='stable')
        return ranks[np.asarray(sites, dtype=int)]

    def members(self, chosen):
        return np.array(sorted(set(self.fixed) | set(int(i) for i in chosen)), dtype=int)

    def evaluate(self, chosen):
        """f̂(S ∪ chosen)."""
        members = self.members(chosen)
        objective = self.objective
        if isinstance(objective, LinearCoeffs):
            return float(np.sum(objective.l[members]))
        if isinstance(objective, QuadraticCoeffs):
            return float(np.sum(objective.l[members]) + np.sum(objective.E[np.ix_(members, members)]))
        return predict_network(objective.model, self.network, members)

    def marginal_gains(self, chosen, sites):
        """f̂(S ∪ chosen ∪ {φ}) - f̂(S ∪ chosen) for each φ in `sites`."""
        sites = np.asarray(sites, dtype=int)
        objective = self.objective
        if isinstance(objective, LinearCoeffs):
            return objective.l[sites].copy()
        members = self.members(chosen)
        if isinstance(objective, QuadraticCoeffs):
            E = objective.E
            return objective.l[sites] + E[np.ix_(members, sites)].sum(axis=0) + E[np.ix_(sites, members)].sum(axis=1)
        current = self.evaluate(chosen)
        return np.array([self.evaluate(list(chosen) + [site]) - current for site in sites])


@dataclasses.dataclass(frozen=True, eq=False)
class ExpansionSolution:
    """
    `chosen` holds the selected candidate positions in ascending order and `order` the same sites in the order
    the solver added them; `marginals` are the objective increases along `order`.
    """
    chosen: Tuple[int, ...]
    objective_value: float
    solver: str
    optimal: bool
    order: Tuple[int, ...] = ()
    marginals: Tuple[float, ...] = ()
    stats: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        assert self.solver in SOLVERS, 'solver should be one of {}, found {}'.format(SOLVERS, self.solver)
        if not self.order:
            object.__setattr__(self, 'order', tuple(self.chosen))

    @property
    def K(self):
        return len(self.chosen)

    def site_ids(self, network):
        return [network.ids[i] for i in self.chosen]


OBJECTIVE_KINDS = {
    LinearCoeffs: 'linear',
    QuadraticCoeffs: 'quadratic',
    BlackBox: 'black_box',
}

SOLVERS = ('baseline', 'sort', 'exact', 'greedy', 'exhaustive')
