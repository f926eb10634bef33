import dataclasses
import itertools
import logging
from typing import Tuple

import pandas as pd

from .cv import CvPlan, CvResult, cross_validate
from ..demand_models import HYPERPARAMETERS
from ..error import ExtensionCapReached

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Grid:
    C_values: Tuple[float, ...] = ()
    epsilon_values: Tuple[float, ...] = ()
    gamma_values: Tuple[float, ...] = ()

    def __post_init__(self):
        assert all(c > 0 for c in self.C_values), 'C values should be > 0'
        assert all(e >= 0 for e in self.epsilon_values), 'epsilon values should be >= 0'
        assert all(g > 0 for g in self.gamma_values), 'gamma values should be > 0'

    @classmethod
    def seed_grid(cls, family):
        """Starting ranges: C in 2^0..2^16, epsilon in 0..1 by 0.1, gamma in 10^-7..10^-3 (radial only)."""
        if family == 'ols':
            return cls()
        return cls(C_values=tuple(2.0 ** k for k in range(17)),
                   epsilon_values=tuple(round(0.1 * k, 10) for k in range(11)),
                   gamma_values=tuple(10.0 ** k for k in range(-7, -2)) if family == 'radial_svr' else ())

    def axes(self, family):
        values = {'C': self.C_values, 'epsilon': self.epsilon_values, 'gamma': self.gamma_values}
        axes = {}
        for name in HYPERPARAMETERS[family]:
            assert len(values[name]) > 0, '{} grid needs at least one {} value'.format(family, name)
            axes[name] = sorted(values[name])
        return axes


@dataclasses.dataclass(frozen=True, eq=False)
class GridSearchResult:
    family: str
    best_params: dict
    best: CvResult
    table: pd.DataFrame
    capped_axes: Tuple[str, ...]
    extensions: dict


def grid_search(network, family, grid: Grid, plan: CvPlan, feature_spec, max_extensions=20, strict=False,
                members=None, **solver_kwargs):
    """
    Minimum mean-RMSE hyperparameters over `grid`, growing the grid while the winner sits on its edge.

    A winning value on a boundary adds one more value beyond it with the axis' own spacing (C and gamma by the
    ratio of their first two values, epsilon by 0.1) and the search repeats, until the winner is interior on
    every axis. epsilon = 0 is a domain edge and counts as interior. An axis with a single value, or one extended
    `max_extensions` times, cannot move; a winner stuck on such a boundary is reported in `capped_axes`.
    Near-equal RMSEs go to the simpler model: smaller C, then smaller gamma, then larger epsilon.
    """
    axes = grid.axes(family)
    steps = {name: _axis_step(name, values) for name, values in axes.items()}
    extensions = {name: 0 for name in axes}
    evaluated = {}

    while True:
        for cell in itertools.product(*axes.values()):
            params = dict(zip(axes, cell))
            key = tuple(sorted(params.items()))
            if key not in evaluated:
                evaluated[key] = cross_validate(network, family, params, plan, feature_spec, members=members,
                                                **solver_kwargs)

        best = _pick_best(list(evaluated.values()))
        capped, moved = [], False
        for name, values in axes.items():
            value = best.params[name]
            if value == values[-1]:
                direction = 1
            elif value == values[0]:
                direction = -1
            else:
                continue

            if steps[name] is None or extensions[name] >= max_extensions:
                if not (name == 'epsilon' and direction == -1 and value <= 0):
                    capped.append(name)
                continue
            new_value = _extend(name, value, steps[name], direction)
            if new_value is None:
                continue
            values.insert(len(values) if direction > 0 else 0, new_value)
            extensions[name] += 1
            moved = True
            logger.info('Grid search %s: %s=%g on the boundary, extending to %g', family, name, value, new_value)

        if not moved:
            break

    table = pd.DataFrame([result.as_row() for result in evaluated.values()])
    result = GridSearchResult(family=family, best_params=dict(best.params), best=best, table=table,
                              capped_axes=tuple(capped), extensions=extensions)
    if capped:
        logger.warning('Grid search %s: winner %s stuck on the boundary of %s', family, best.params, capped)
        if strict:
            raise ExtensionCapReached(capped, result)
    return result


def _pick_best(results):
    lowest = min(result.mean_rmse for result in results)
    close = [result for result in results if result.mean_rmse <= lowest + RMSE_TIE_RTOL * max(abs(lowest), 1.0)]
    return min(close, key=lambda r: (r.params.get('C', 0.0), r.params.get('gamma', 0.0),
                                     -r.params.get('epsilon', 0.0)))


def _axis_step(name, values):
    if len(values) < 2:
        return None
    if name == 'epsilon':
        return EPSILON_STEP
    return values[1] / values[0]


def _extend(name, value, step, direction):
    if name == 'epsilon':
        if direction < 0 and value <= 0:
            # zero is the domain edge, which counts as interior
            return None
        return max(0.0, round(value + direction * step, 10))
    return float('{:.12g}'.format(value * step if direction > 0 else value / step))


EPSILON_STEP = 0.1
RMSE_TIE_RTOL = 1e-9
