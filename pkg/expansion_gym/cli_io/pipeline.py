import contextlib
import json
import logging
import os

import numpy as np

from .config import RunConfig
from .reports import emit_map_svg, emit_table
from .sites import load_sites
from ..error import Error, PipelineError
from ..experiment import robustness_check, run_gain_sweep
from ..model_select import cv_table, refit, resolve_feature_spec, select_model
from ..optimize import build_problem, marginal_table, solve
from ..spatial_stats import moran_table

logger = logging.getLogger(__name__)


def pipeline_run(config: RunConfig):
    """
    The whole study on one site file: Moran tests, feature policy, tuned CV of every family with and without the
    spatial lag, selection and refit of P*, the expansion under P*, the simulated-demand gain sweep and the
    cross-model robustness check.

    Outputs land in `config.out` as each stage finishes; a failing stage raises PipelineError naming it, and the
    outputs of earlier stages stay in place. `manifest.json` records the seed, every config knob and the
    decisions taken.
    """
    config.validate(require_sites=True, require_seed=True)
    os.makedirs(config.out, exist_ok=True)
    manifest = {'seed': config.seed, 'config': config.to_dict(), 'stages': [], 'outputs': {}}
    outputs = manifest['outputs']
    solver_kwargs = config.solver_kwargs()

    def path(name):
        outputs[name] = name
        return os.path.join(config.out, name)

    try:
        with _stage(manifest, 'load'):
            network = load_sites(config.sites, distance_metric=config.distance_metric)
            manifest['network'] = {'sites': len(network), 'active': len(network.active),
                                   'candidates': len(network.candidates)}

        with _stage(manifest, 'moran'):
            moran = moran_table(network, permutations=config.permutations, seed=config.seed,
                                alternative=config.alternative)
            emit_table(moran, path('moran.csv'))

        with _stage(manifest, 'features'):
            feature_spec = resolve_feature_spec(config.feature_policy, float(moran.loc['base_sales', 'p_value']),
                                                config.alpha)
            manifest['feature_policy'] = {'policy': config.feature_policy,
                                          'use_spatial_lag': feature_spec.use_spatial_lag,
                                          'base_sales_p_value': float(moran.loc['base_sales', 'p_value'])}

        with _stage(manifest, 'cv'):
            table, searches = cv_table(network, config.cv_plan(), grids=config.grids(),
                                       families=tuple(config.families), max_extensions=config.max_extensions,
                                       **solver_kwargs)
            emit_table(table, path('cv.csv'))
            for use_lag, by_family in searches.items():
                for family, search in by_family.items():
                    emit_table(search.table, path('grid_{}_{}.csv'.format(family, 4 if use_lag else 3)),
                               index=False)

        with _stage(manifest, 'select'):
            selection = select_model(network, config.cv_plan(), feature_spec,
                                     searches=searches[feature_spec.use_spatial_lag], **solver_kwargs)
            selection.model.save(path('model.json'))
            manifest['selection'] = {'family': selection.family, 'params': selection.params,
                                     'cv_rmse': selection.cv.mean_rmse, 'cv_mape': selection.cv.mean_mape,
                                     'cv_dropped_repeats': selection.cv.dropped_repeats,
                                     'cv_mape_skipped': selection.cv.mape_skipped}
            exact_kwargs = config.exact_kwargs(selection.model)

        with _stage(manifest, 'optimize'):
            if np.isnan(network.base_sales[list(network.candidates)]).any():
                logger.warning('Candidates lack base sales; skipping the expansion on observed data')
                manifest['optimize'] = 'skipped: candidates lack base sales'
            else:
                K = min(config.k, len(network.candidates))
                problem = build_problem(selection.model, network, K, solver=config.solver)
                solution = solve(problem, config.solver, **exact_kwargs)
                emit_table(marginal_table(problem, solution), path('solution.csv'), index=False)
                emit_map_svg(network, solution, path('map.svg'), title='{}: K={}'.format(config.region, K))
                manifest['optimize'] = {'K': K, 'solver': solution.solver, 'optimal': solution.optimal,
                                        'objective': solution.objective_value,
                                        'chosen': solution.site_ids(network)}

        with _stage(manifest, 'experiment'):
            sweep = run_gain_sweep(network, selection.model, config.sim_config(), solver=config.solver,
                                   region=config.region, **exact_kwargs)
            emit_table(sweep.table(), path('gains.csv'))
            emit_table(sweep.frame(), path('gain_records.csv'), index=False)
            manifest['experiment'] = {'solver': sweep.solver, 'K_max': sweep.K_max, 'excluded': sweep.excluded,
                                      'non_optimal': sweep.non_optimal}

        with _stage(manifest, 'robustness'):
            models = {}
            for family, search in searches[feature_spec.use_spatial_lag].items():
                models[family] = selection.model if family == selection.family else \
                    refit(network, family, search.best_params, feature_spec, **solver_kwargs)
            for label, result in robustness_check(network, sweep, models, reference=selection.model).items():
                emit_table(result.table(), path('robustness_{}.csv'.format(label)))
                emit_table(result.frame(), path('robustness_{}_records.csv'.format(label)), index=False)
    finally:
        _write_manifest(manifest, os.path.join(config.out, MANIFEST_FILE))

    logger.info('Run %s finished; outputs in %s', config.region, config.out)
    return {name: os.path.join(config.out, name) for name in outputs}


@contextlib.contextmanager
def _stage(manifest, name):
    logger.info('Stage %s', name)
    try:
        yield
    except Error as exc:
        manifest['failed_stage'] = name
        logger.error('Stage %s failed: %s', name, exc)
        raise PipelineError(name, exc) from exc
    manifest['stages'].append(name)


def _write_manifest(manifest, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=1, sort_keys=True, default=_json_default)


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError('cannot serialize {!r}'.format(value))


MANIFEST_FILE = 'manifest.json'
