"""
Usage: expansion-gym <command> [options]

Every command accepts `--config <yaml>` and a flag per config key (`--cv_repeats 5`, `--alpha 0.1`, ...) that
overrides the file. `experiment` and `run` need `--seed`.
"""

import argparse
import logging
import os
import sys
import typing

import numpy as np
import pandas as pd

from .config import config_fields, load_config
from .pipeline import pipeline_run
from .reports import emit_map_svg, emit_table
from .sites import load_sites, write_sites
from ..demand_models import DemandModel, build_features, fit_model
from ..error import ConfigError, Error
from ..experiment import make_synthetic_region, robustness_check, run_gain_sweep
from ..model_select import cv_table, resolve_feature_spec, select_model
from ..optimize import build_problem, marginal_table, solve
from ..spatial_stats import autocorrelation_inherited, moran_table

logger = logging.getLogger(__name__)


def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(prog='expansion-gym',
                                     description='Predict add-on demand and choose expansion sites.')
    commands = parser.add_subparsers(dest='command', required=True)

    moran = _command(commands, 'moran', 'Moran tests of base sales, add-on sales and residuals.')
    moran.add_argument('--format', choices=('csv', 'text'), default='text')
    moran.add_argument('--output', type=str, default=None, help='File to write instead of stdout.')

    fit = _command(commands, 'fit', 'Fit one model family on the active sites.')
    fit.add_argument('--family', choices=('ols', 'linear_svr', 'radial_svr'), required=True)
    fit.add_argument('--C', type=float, default=1.0)
    fit.add_argument('--epsilon', type=float, default=0.1)
    fit.add_argument('--gamma', type=float, default=None)
    fit.add_argument('--model', type=str, required=True, help='Model file to write.')

    predict = _command(commands, 'predict', 'Per-site predictions of a fitted model.')
    predict.add_argument('--model', type=str, required=True)
    predict.add_argument('--output', type=str, default=None)

    cv = _command(commands, 'cv', 'Tuned cross validation of every family, with and without the spatial lag.')
    cv.add_argument('--output', type=str, default=None)

    select = _command(commands, 'select', 'Select and refit the best predictor.')
    select.add_argument('--model', type=str, required=True, help='Model file to write.')

    optimize = _command(commands, 'optimize', 'Choose K expansion sites under a fitted model.')
    optimize.add_argument('--model', type=str, required=True)

    experiment = _command(commands, 'experiment', 'Simulated-demand gain sweep and robustness check.')
    experiment.add_argument('--model', type=str, required=True)
    experiment.add_argument('--alt-models', dest='alt_models', type=str, nargs='*', default=[])

    _command(commands, 'run', 'The full pipeline.')

    map_ = _command(commands, 'map', 'SVG map of a site file.')
    map_.add_argument('--chosen', type=str, nargs='*', default=[], help='Ids of chosen candidate sites.')
    map_.add_argument('--output', type=str, required=True)

    synth = _command(commands, 'synth', 'Write a synthetic region.')
    synth.add_argument('--n_active', type=int, default=90)
    synth.add_argument('--n_candidates', type=int, default=230)
    synth.add_argument('--iid', action='store_true', help='No spatial structure in base sales.')
    synth.add_argument('--output', type=str, required=True)

    summary = _command(commands, 'summary', 'Mean and sd of every field over active and candidate sites.')
    summary.add_argument('--output', type=str, default=None)

    return parser.parse_args(argv)


def _command(commands, name, help_text):
    parser = commands.add_parser(name, help=help_text, description=help_text)
    parser.add_argument('--config', type=str, default=None, help='YAML config file.')
    parser.add_argument('--verbose', '-v', action='count', default=0)
    for field, field_type, _ in config_fields():
        parser.add_argument('--' + field, dest=field, default=None, **_flag_type(field_type))
    return parser


def _flag_type(field_type):
    if typing.get_origin(field_type) is typing.Union:
        field_type = next(arg for arg in typing.get_args(field_type) if arg is not type(None))
    if typing.get_origin(field_type) in (list, typing.List):
        return {'type': typing.get_args(field_type)[0], 'nargs': '+'}
    return {'type': field_type}


def main(argv=None):
    args = parse_arguments(argv)
    logging.basicConfig(level=VERBOSITY.get(args.verbose, logging.DEBUG),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    overrides = {field: getattr(args, field) for field, _, _ in config_fields()}
    try:
        config = load_config(args.config, overrides=overrides)
        config.validate(require_sites=args.command != 'synth', require_seed=args.command in SEEDED_COMMANDS)
        COMMANDS[args.command](args, config)
    except Error as exc:
        logger.error('%s', exc)
        return 1
    return 0


def _network(config):
    return load_sites(config.sites, distance_metric=config.distance_metric)


def _feature_spec(network, config):
    p_value = None
    if config.feature_policy == 'auto':
        table = moran_table(network, permutations=config.permutations, seed=config.seed,
                            alternative=config.alternative)
        p_value = float(table.loc['base_sales', 'p_value'])
    return resolve_feature_spec(config.feature_policy, p_value, config.alpha)


def _emit(text, output):
    if output is None:
        sys.stdout.write(text)


def run_moran(args, config):
    table = moran_table(_network(config), permutations=config.permutations, seed=config.seed,
                        alternative=config.alternative)
    _emit(emit_table(table, args.output, fmt=args.format), args.output)
    if autocorrelation_inherited(table, config.alpha):
        logger.info('Add-on autocorrelation is inherited from base sales')


def run_fit(args, config):
    if args.family == 'radial_svr' and args.gamma is None:
        raise ConfigError('--gamma is required for radial_svr')
    network = _network(config)
    spec = _feature_spec(network, config)
    X, y = build_features(network, network.active, spec)
    params = {'C': args.C, 'epsilon': args.epsilon, 'gamma': args.gamma}
    model = fit_model(args.family, X, y, feature_spec=spec, params=params, **config.solver_kwargs())
    model.save(args.model)


def run_predict(args, config):
    network = _network(config)
    model = DemandModel.load(args.model)
    members = np.flatnonzero(~np.isnan(network.base_sales))
    X, _ = build_features(network, members, model.feature_spec)
    predicted = model.predict(X)
    table = pd.DataFrame({'id': [network.ids[i] for i in members],
                          'status': [network.sites[i].status for i in members],
                          'predicted': predicted,
                          'predicted_clipped': np.maximum(predicted, 0.0)})
    _emit(emit_table(table, args.output, index=False), args.output)


def run_cv(args, config):
    table, _ = cv_table(_network(config), config.cv_plan(), grids=config.grids(), families=tuple(config.families),
                        max_extensions=config.max_extensions, **config.solver_kwargs())
    _emit(emit_table(table, args.output), args.output)


def run_select(args, config):
    network = _network(config)
    selection = select_model(network, config.cv_plan(), _feature_spec(network, config), grids=config.grids(),
                             families=tuple(config.families), max_extensions=config.max_extensions,
                             **config.solver_kwargs())
    selection.model.save(args.model)
    print('{} {} features={} CV RMSE={:.6g} MAPE={:.4g}%'.format(
        selection.family, selection.params, selection.feature_spec.n_features, selection.cv.mean_rmse,
        selection.cv.mean_mape))


def run_optimize(args, config):
    network = _network(config)
    model = DemandModel.load(args.model)
    if config.k > len(network.candidates):
        raise ConfigError('--k {} exceeds the {} candidates'.format(config.k, len(network.candidates)))
    problem = build_problem(model, network, config.k, solver=config.solver)
    solution = solve(problem, config.solver, **config.exact_kwargs(model))
    os.makedirs(config.out, exist_ok=True)
    emit_table(marginal_table(problem, solution), os.path.join(config.out, 'solution.csv'), index=False)
    emit_map_svg(network, solution, os.path.join(config.out, 'map.svg'),
                 title='{}: K={}'.format(config.region, config.k))
    print('chosen: {}'.format(' '.join(solution.site_ids(network))))
    print('objective: {:.6f}  solver: {}  optimal: {}'.format(solution.objective_value, solution.solver,
                                                             solution.optimal))


def run_experiment(args, config):
    network = _network(config)
    model = DemandModel.load(args.model)
    sweep = run_gain_sweep(network, model, config.sim_config(), solver=config.solver, region=config.region,
                           **config.exact_kwargs(model))
    os.makedirs(config.out, exist_ok=True)
    emit_table(sweep.table(), os.path.join(config.out, 'gains.csv'))
    emit_table(sweep.frame(), os.path.join(config.out, 'gain_records.csv'), index=False)

    models = {os.path.splitext(os.path.basename(path))[0]: DemandModel.load(path) for path in args.alt_models}
    for label, result in robustness_check(network, sweep, models, reference=model).items():
        emit_table(result.table(), os.path.join(config.out, 'robustness_{}.csv'.format(label)))
        emit_table(result.frame(), os.path.join(config.out, 'robustness_{}_records.csv'.format(label)), index=False)
    print(emit_table(sweep.table(), fmt='text'), end='')


def run_pipeline(args, config):
    pipeline_run(config)


def run_map(args, config):
    network = _network(config)
    chosen = tuple(sorted(network.index_of(site_id) for site_id in args.chosen))
    emit_map_svg(network, chosen, args.output, title=config.region)


def run_synth(args, config):
    network = make_synthetic_region(n_active=args.n_active, n_candidates=args.n_candidates, spatial=not args.iid,
                                    seed=config.seed)
    write_sites(network, args.output)


def run_summary(args, config):
    _emit(emit_table(_network(config).summary(), args.output, fmt='csv' if args.output else 'text'), args.output)


COMMANDS = {
    'moran': run_moran,
    'fit': run_fit,
    'predict': run_predict,
    'cv': run_cv,
    'select': run_select,
    'optimize': run_optimize,
    'experiment': run_experiment,
    'run': run_pipeline,
    'map': run_map,
    'synth': run_synth,
    'summary': run_summary,
}

SEEDED_COMMANDS = ('experiment', 'run')

VERBOSITY = {
    0: logging.WARNING,
    1: logging.INFO,
}

if __name__ == "__main__":
    sys.exit(main())
