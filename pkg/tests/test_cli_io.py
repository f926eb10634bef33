import json
import xml.etree.ElementTree as ElementTree

import pandas as pd
import pytest
from pytest_cases import parametrize

from expansion_gym.cli_io import (MANIFEST_FILE, RunConfig, emit_map_svg, emit_table, load_config, load_sites,
                                  pipeline_run, write_sites)
from expansion_gym.cli_io.cli import main
from expansion_gym.demand_models import DemandModel
from expansion_gym.error import (ConfigError, DuplicateId, EmptyNetwork, OutOfRangeCoordinate, PipelineError,
                                 SchemaError)
from expansion_gym.experiment import make_synthetic_region
from tests.networks import ols_model

HEADER = 'id,lat,lon,status,base_sales,addon_sales,income,population\n'


def write_csv(tmp_path, rows, name='sites.csv'):
    path = tmp_path / name
    path.write_text(HEADER + ''.join(row + '\n' for row in rows))
    return str(path)


@pytest.fixture(scope='module')
def sites_file(tmp_path_factory):
    path = tmp_path_factory.mktemp('region') / 'sites.csv'
    write_sites(make_synthetic_region(n_active=60, n_candidates=12, spatial=True, seed=2), str(path))
    return str(path)


def small_config(sites, out, **overrides):
    knobs = dict(region='test', sites=sites, out=str(out), seed=7, permutations=99, families=['ols', 'linear_svr'],
                 cv_repeats=2, cv_folds=3, C_values=[1.0, 2.0, 4.0], epsilon_values=[0.1, 0.2, 0.3],
                 max_extensions=2, k=3, s_values=[2], draws_per_sigma=2, K_max=3)
    knobs.update(overrides)
    return RunConfig(**knobs)


def test_load_minimal_file(tmp_path):
    path = write_csv(tmp_path, ['a1,34.0,-84.0,active,1200,150,55,8', 'c1,34.1,-84.1,Candidate,,,60,'])
    network = load_sites(path)
    assert network.ids == ('a1', 'c1')
    assert network.sites[1].status == 'candidate'
    assert network.sites[1].base_sales is None and network.sites[1].population is None
    assert network.addon_sales[0] == 150


def test_active_site_needs_addon_sales(tmp_path):
    path = write_csv(tmp_path, ['a1,34.0,-84.0,active,1200,150,55,8', 'a2,34.1,-84.1,active,900,,60,4'])
    with pytest.raises(SchemaError) as info:
        load_sites(path)
    assert info.value.issues == [(3, 'addon_sales', 'required for active sites')]
    assert 'line 3' in str(info.value)


def test_candidate_cannot_carry_addon_sales(tmp_path):
    path = write_csv(tmp_path, ['a1,34.0,-84.0,active,1200,150,55,8', 'c1,34.1,-84.1,candidate,900,30,60,4'])
    with pytest.raises(SchemaError) as info:
        load_sites(path)
    assert [issue[:2] for issue in info.value.issues] == [(3, 'addon_sales')]


def test_duplicate_ids_name_both_lines(tmp_path):
    path = write_csv(tmp_path, ['a1,34.0,-84.0,active,1200,150,55,8', 'c1,34.1,-84.1,candidate,,,60,4',
                                'a1,34.2,-84.2,active,1000,120,50,6'])
    with pytest.raises(DuplicateId) as info:
        load_sites(path)
    (line, field, reason), = info.value.issues
    assert (line, field) == (4, 'id')
    assert 'line 2' in reason


@parametrize('lat,lon,field', [('95.0', '-84.0', 'lat'), ('34.0', '-181', 'lon')])
def test_out_of_range_coordinates(tmp_path, lat, lon, field):
    path = write_csv(tmp_path, ['a1,{},{},active,1200,150,55,8'.format(lat, lon), 'c1,34.1,-84.1,candidate,,,60,4'])
    with pytest.raises(OutOfRangeCoordinate) as info:
        load_sites(path)
    assert [issue[:2] for issue in info.value.issues] == [(2, field)]


def test_mixed_problems_are_a_schema_error(tmp_path):
    path = write_csv(tmp_path, ['a1,34.0,-84.0,active,1200,150,55,8', 'a1,34.1,-84.1,active,lots,120,50,6',
                                'c1,91,-84.3,candidate,,,60,4'])
    with pytest.raises(SchemaError) as info:
        load_sites(path)
    assert type(info.value) is SchemaError
    assert [issue[:2] for issue in info.value.issues] == [(3, 'id'), (3, 'base_sales'), (4, 'lat')]


def test_missing_column(tmp_path):
    path = tmp_path / 'sites.csv'
    path.write_text('id,lat,lon,status\na1,34,-84,active\n')
    with pytest.raises(SchemaError) as info:
        load_sites(str(path))
    assert {field for _, field, _ in info.value.issues} == {'base_sales', 'addon_sales', 'income', 'population'}


def test_written_sites_load_back_unchanged(tmp_path):
    first = tmp_path / 'first.csv'
    second = tmp_path / 'second.csv'
    region = make_synthetic_region(n_active=10, n_candidates=5, seed=1)
    write_sites(region, str(first))
    loaded = load_sites(str(first))
    write_sites(loaded, str(second))
    assert first.read_bytes() == second.read_bytes()
    assert loaded.sites == region.sites


def test_yaml_config_with_overrides(tmp_path):
    path = tmp_path / 'config.yaml'
    path.write_text('region: north\ncv_repeats: 3\nfamilies: [ols]\nalpha: 0.01\n')
    config = load_config(str(path), overrides={'alpha': 0.1, 'seed': None, 'k': 4})
    assert config.region == 'north' and config.cv_repeats == 3 and config.families == ['ols']
    assert config.alpha == 0.1 and config.k == 4 and config.seed is None
    assert config.cv_plan().repeats == 3


def test_unknown_config_key(tmp_path):
    path = tmp_path / 'config.yaml'
    path.write_text('cv_repeat: 3\n')
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_config_must_be_a_mapping(tmp_path):
    path = tmp_path / 'config.yaml'
    path.write_text('- ols\n- linear_svr\n')
    with pytest.raises(ConfigError):
        load_config(str(path))


@parametrize('knobs', [{'alpha': 1.5}, {'solver': 'annealing'}, {'families': ['forest']}, {'cv_folds': 0},
                            {'max_nodes': -1}, {'time_limit': 0.0}])
def test_invalid_config(knobs):
    with pytest.raises(ConfigError):
        RunConfig(**knobs).validate(require_sites=False)


def test_seed_requirement():
    with pytest.raises(ConfigError):
        RunConfig().validate(require_sites=False, require_seed=True)
    assert RunConfig(seed=3).validate(require_sites=False, require_seed=True).sim_config().seed == 3


def test_empty_grid_lists_fall_back_to_seed_grids():
    grids = RunConfig(families=['linear_svr', 'radial_svr'], C_values=[1.0, 2.0]).grids()
    assert grids['linear_svr'].C_values == (1.0, 2.0)
    assert grids['linear_svr'].gamma_values == ()
    assert len(grids['radial_svr'].gamma_values) == 5


def test_emit_table(tmp_path):
    frame = pd.DataFrame({'K': [1, 2], 'gain': [0.5, 1.25]})
    text = emit_table(frame, index=False)
    assert text == 'K,gain\n1,0.5\n2,1.25\n'
    path = tmp_path / 'gains.csv'
    emit_table(frame, str(path), index=False)
    assert path.read_text() == text
    assert emit_table(frame, fmt='text', index=False).splitlines()[0].split() == ['K', 'gain']


def _group_ids(path):
    return {element.get('id') for element in ElementTree.parse(str(path)).getroot().iter()}


def test_map_marks_chosen_candidates(tmp_path):
    region = make_synthetic_region(n_active=8, n_candidates=4, seed=0)
    chosen_map, idle_map = tmp_path / 'chosen.svg', tmp_path / 'idle.svg'
    emit_map_svg(region, region.candidates[:2], str(chosen_map), title='two chosen')
    emit_map_svg(region, None, str(idle_map))

    assert {'active-sites', 'candidates', 'chosen-candidates'} <= _group_ids(chosen_map)
    assert 'chosen-candidates' not in _group_ids(idle_map)
    assert 'active-sites' in _group_ids(idle_map)


def test_map_is_reproducible(tmp_path):
    region = make_synthetic_region(n_active=8, n_candidates=4, seed=0)
    emit_map_svg(region, region.candidates[:1], str(tmp_path / 'a.svg'))
    emit_map_svg(region, region.candidates[:1], str(tmp_path / 'b.svg'))
    assert (tmp_path / 'a.svg').read_bytes() == (tmp_path / 'b.svg').read_bytes()


def test_map_of_nothing():
    with pytest.raises(EmptyNetwork):
        emit_map_svg(None, None, 'unused.svg')


def test_pipeline_run(sites_file, tmp_path):
    outputs = pipeline_run(small_config(sites_file, tmp_path / 'first'))
    manifest = json.loads((tmp_path / 'first' / MANIFEST_FILE).read_text())

    assert manifest['seed'] == 7
    assert manifest['stages'] == ['load', 'moran', 'features', 'cv', 'select', 'optimize', 'experiment',
                                  'robustness']
    assert manifest['feature_policy']['use_spatial_lag'] is True
    assert manifest['selection']['family'] in ('ols', 'linear_svr')
    assert len(manifest['optimize']['chosen']) == 3
    assert manifest['experiment']['K_max'] == 3
    assert manifest['experiment']['non_optimal'] == 0
    assert manifest['selection']['cv_dropped_repeats'] == 0
    for name in ('moran.csv', 'cv.csv', 'model.json', 'solution.csv', 'map.svg', 'gains.csv',
                 'robustness_ols.csv', 'robustness_linear_svr.csv'):
        assert name in outputs
    assert DemandModel.load(outputs['model.json']).family == manifest['selection']['family']

    again = pipeline_run(small_config(sites_file, tmp_path / 'second'))
    for name, path in outputs.items():
        if name.endswith('.csv'):
            with open(path, 'rb') as first, open(again[name], 'rb') as second:
                assert first.read() == second.read(), name


def test_pipeline_names_the_failing_stage(tmp_path):
    path = write_csv(tmp_path, ['a1,34.0,-84.0,active,1200,150,55,8', 'a1,34.1,-84.1,active,900,100,60,4'])
    with pytest.raises(PipelineError) as info:
        pipeline_run(small_config(path, tmp_path / 'out'))
    assert info.value.stage == 'load'
    manifest = json.loads((tmp_path / 'out' / MANIFEST_FILE).read_text())
    assert manifest['failed_stage'] == 'load'
    assert manifest['stages'] == []


def test_cli_commands(tmp_path, capsys):
    sites = str(tmp_path / 'sites.csv')
    model = str(tmp_path / 'model.json')
    out = tmp_path / 'out'

    assert main(['synth', '--output', sites, '--seed', '3', '--n_active', '20', '--n_candidates', '6']) == 0
    assert main(['summary', '--sites', sites]) == 0
    assert 'mean' in capsys.readouterr().out

    assert main(['fit', '--sites', sites, '--family', 'ols', '--feature_policy', 'force-3', '--model', model]) == 0
    assert DemandModel.load(model).family == 'ols'

    assert main(['optimize', '--sites', sites, '--model', model, '--k', '2', '--out', str(out)]) == 0
    assert (out / 'solution.csv').exists() and (out / 'map.svg').exists()
    assert 'chosen:' in capsys.readouterr().out

    assert main(['moran', '--sites', sites, '--seed', '1', '--permutations', '99', '--format', 'csv',
                 '--output', str(tmp_path / 'moran.csv')]) == 0
    assert list(pd.read_csv(tmp_path / 'moran.csv', index_col=0).index) == ['base_sales', 'addon_sales',
                                                                             'residuals']


def test_cli_reports_errors(tmp_path):
    sites = str(tmp_path / 'sites.csv')
    assert main(['synth', '--output', sites, '--seed', '3', '--n_active', '10', '--n_candidates', '4']) == 0
    assert main(['experiment', '--sites', sites, '--model', str(tmp_path / 'model.json')]) == 1
    assert main(['summary', '--sites', str(tmp_path / 'missing.csv')]) == 1


def test_cli_rejects_bad_arguments(tmp_path):
    sites = str(tmp_path / 'sites.csv')
    model = str(tmp_path / 'model.json')
    assert main(['synth', '--output', sites, '--seed', '3', '--n_active', '20', '--n_candidates', '4']) == 0
    assert main(['fit', '--sites', sites, '--family', 'radial_svr', '--model', model]) == 1
    assert main(['fit', '--sites', sites, '--family', 'ols', '--feature_policy', 'force-3', '--model', model]) == 0
    assert main(['optimize', '--sites', sites, '--model', model, '--k', '5', '--out', str(tmp_path / 'out')]) == 1
    assert main(['optimize', '--sites', sites, '--model', model, '--k', '4', '--out', str(tmp_path / 'out')]) == 0


def test_exact_search_budget_follows_the_model():
    config = RunConfig(max_nodes=50, time_limit=2.0)
    lag = ols_model([1.0, 0.1, 0.1, 0.1, 0.1])
    assert config.exact_kwargs(lag) == {'time_limit': 2.0, 'max_nodes': 50}
    assert config.exact_kwargs(ols_model([1.0, 0.1, 0.1, 0.1])) == {}
