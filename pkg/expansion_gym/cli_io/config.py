import dataclasses
import logging
import os
from typing import List, Optional

import yaml

from ..demand_models import FAMILIES
from ..error import ConfigError
from ..experiment import SimConfig
from ..geo_core import DISTANCE_METRICS
from ..model_select import FEATURE_POLICIES, CvPlan, Grid
from ..optimize import MAX_NODES, SOLVER_CHOICES, resolve_solver
from ..spatial_stats.moran import ALTERNATIVES

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class RunConfig:
    """
    Every knob of a run, flat so that each key doubles as a command-line flag of the same name.
    Grid value lists left empty fall back to the family's seed grid.
    """
    region: str = 'region'
    sites: Optional[str] = None
    out: str = 'out'
    seed: Optional[int] = None
    distance_metric: str = 'haversine'
    feature_policy: str = 'auto'
    alpha: float = 0.05
    permutations: int = 999
    alternative: str = 'greater'
    families: List[str] = dataclasses.field(default_factory=lambda: list(FAMILIES))
    cv_repeats: int = 50
    cv_folds: int = 10
    C_values: List[float] = dataclasses.field(default_factory=list)
    epsilon_values: List[float] = dataclasses.field(default_factory=list)
    gamma_values: List[float] = dataclasses.field(default_factory=list)
    max_extensions: int = 20
    svr_tol: float = 1e-3
    svr_max_iter: int = 10 ** 6
    k: int = 10
    solver: str = 'auto'
    time_limit: Optional[float] = None
    max_nodes: int = MAX_NODES
    s_values: List[float] = dataclasses.field(default_factory=lambda: [2, 4, 6])
    draws_per_sigma: int = 10
    K_max: int = 20

    def validate(self, require_sites=True, require_seed=False):
        problems = []
        if not 0 < self.alpha < 1:
            problems.append('alpha should be in (0, 1), found {}'.format(self.alpha))
        for name, value, choices in (('feature_policy', self.feature_policy, FEATURE_POLICIES),
                                     ('distance_metric', self.distance_metric, DISTANCE_METRICS),
                                     ('alternative', self.alternative, ALTERNATIVES),
                                     ('solver', self.solver, SOLVER_CHOICES)):
            if value not in choices:
                problems.append('{} should be one of {}, found {!r}'.format(name, choices, value))
        unknown = [family for family in self.families if family not in FAMILIES]
        if unknown or not self.families:
            problems.append('families should be a non-empty subset of {}, found {}'.format(FAMILIES, self.families))
        if require_sites and (self.sites is None or not os.path.isfile(self.sites)):
            problems.append('sites file {!r} not found'.format(self.sites))
        if require_seed and self.seed is None:
            problems.append('a seed is required')
        for name in ('cv_repeats', 'cv_folds', 'draws_per_sigma', 'K_max', 'k', 'permutations'):
            if getattr(self, name) < 1:
                problems.append('{} should be >= 1'.format(name))
        if self.max_nodes < 0:
            problems.append('max_nodes should be >= 0 (0 means no limit)')
        if self.time_limit is not None and self.time_limit <= 0:
            problems.append('time_limit should be positive')
        if problems:
            raise ConfigError('; '.join(problems))
        return self

    def cv_plan(self):
        return CvPlan(repeats=self.cv_repeats, folds=self.cv_folds, seed=self._seed())

    def grids(self):
        grids = {}
        for family in self.families:
            seed = Grid.seed_grid(family)
            grids[family] = Grid(C_values=tuple(self.C_values) or seed.C_values,
                                 epsilon_values=tuple(self.epsilon_values) or seed.epsilon_values,
                                 gamma_values=(tuple(self.gamma_values) or seed.gamma_values)
                                 if family == 'radial_svr' else ())
        return grids

    def sim_config(self):
        return SimConfig(s_values=tuple(self.s_values), draws_per_sigma=self.draws_per_sigma, K_max=self.K_max,
                         seed=self._seed())

    def solver_kwargs(self):
        return {'tol': self.svr_tol, 'max_iter': self.svr_max_iter}

    def exact_kwargs(self, model):
        """Search budget for the exact solver; empty when `model` resolves to another solver."""
        if resolve_solver(model, self.solver) != 'exact':
            return {}
        return {'time_limit': self.time_limit, 'max_nodes': self.max_nodes}

    def to_dict(self):
        return dataclasses.asdict(self)

    def _seed(self):
        return 0 if self.seed is None else self.seed


def load_config(path=None, overrides=None):
    """RunConfig from a YAML file (optional) with `overrides` applied on top. Unknown keys are an error."""
    data = {}
    if path is not None:
        try:
            with open(path, encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError('cannot read config {}: {}'.format(path, exc)) from exc
        if not isinstance(data, dict):
            raise ConfigError('config {} should hold a mapping of keys'.format(path))
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})

    known = {field.name for field in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError('unknown config keys: {}'.format(', '.join(unknown)))
    logger.debug('Config: %s', data)
    return RunConfig(**data)


def config_fields():
    """(name, type, default) of every RunConfig key, for building command-line flags."""
    return [(field.name, field.type, field.default) for field in dataclasses.fields(RunConfig)]
