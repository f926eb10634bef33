import dataclasses

import numpy as np
import pandas as pd
import pytest
from pytest_cases import parametrize

import expansion_gym.model_select.cv as cv_module
from expansion_gym.demand_models import FeatureSpec
from expansion_gym.error import ExtensionCapReached, FoldFailure, SingularDesign, ZeroActual
from expansion_gym.experiment import make_synthetic_region
from expansion_gym.geo_core import Network, Site
from expansion_gym.model_select import (CvPlan, CvResult, Grid, GridSearchResult, cross_validate, cv_table,
                                        grid_search, mape, resolve_feature_spec, rmse, select_model)
from expansion_gym.model_select.grid import _extend

PLAN = CvPlan(repeats=2, folds=3, seed=5)


@pytest.fixture(scope='module')
def region():
    return make_synthetic_region(n_active=30, n_candidates=5, spatial=True, seed=1)


def affine_network(n_active, coefficients=(10.0, 0.05, 1.5, 4.0), noise=0.0, seed=0):
    rng = np.random.RandomState(seed)
    b0, bg, bh, bp = coefficients
    sites = []
    for k in range(n_active):
        g, h, p = rng.uniform(500, 3000), rng.uniform(30, 90), rng.uniform(1, 15)
        sites.append(Site('a{:02d}'.format(k), 34 + rng.uniform(-1, 1), -84 + rng.uniform(-1, 1), 'active', g,
                          b0 + bg * g + bh * h + bp * p + noise * rng.normal(), h, p))
    return Network(sites)


def test_perfect_predictions():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0
    assert mape([1.0, 2.0], [1.0, 2.0]) == 0


def test_single_point_metrics():
    assert rmse([3.0], [1.0]) == pytest.approx(2.0)
    assert mape([3.0], [1.0]) == pytest.approx(200.0)


def test_two_point_metrics():
    assert rmse([1.0, 2.0], [2.0, 1.0]) == pytest.approx(1.0)
    assert mape([1.0, 2.0], [2.0, 1.0]) == pytest.approx(75.0)


def test_metrics_are_permutation_invariant():
    rng = np.random.RandomState(0)
    predictions, actuals = rng.uniform(1, 5, size=20), rng.uniform(1, 5, size=20)
    order = rng.permutation(20)
    assert rmse(predictions[order], actuals[order]) == pytest.approx(rmse(predictions, actuals), rel=1e-12)
    assert mape(predictions[order], actuals[order]) == pytest.approx(mape(predictions, actuals), rel=1e-12)


def test_zero_actual():
    with pytest.raises(ZeroActual) as info:
        mape([1.0, 2.0, 3.0], [1.0, 0.0, 3.0])
    assert info.value.index == 1


def test_plan_validation():
    assert CvPlan() == CvPlan(repeats=50, folds=10, seed=0)
    assert CvPlan.ci(seed=3) == CvPlan(repeats=5, folds=5, seed=3)
    with pytest.raises(AssertionError):
        CvPlan(folds=1)


def test_constant_target_is_learnt_exactly():
    network = affine_network(12, coefficients=(42.0, 0.0, 0.0, 0.0))
    result = cross_validate(network, 'ols', {}, CvPlan(repeats=3, folds=4), FeatureSpec())
    assert result.mean_rmse == pytest.approx(0.0, abs=1e-8)
    assert result.sd_rmse == pytest.approx(0.0, abs=1e-8)


def test_leave_one_out_on_affine_data():
    network = affine_network(5)
    result = cross_validate(network, 'ols', {}, CvPlan(repeats=1, folds=5), FeatureSpec())
    assert result.mean_rmse == pytest.approx(0.0, abs=1e-6)
    assert result.sd_rmse == 0.0


def test_cross_validation_is_deterministic(region):
    params = {'C': 4.0, 'epsilon': 0.1}
    first = cross_validate(region, 'linear_svr', params, PLAN, FeatureSpec(use_spatial_lag=True))
    second = cross_validate(region, 'linear_svr', params, PLAN, FeatureSpec(use_spatial_lag=True))
    assert np.array_equal(first.repeat_rmse, second.repeat_rmse)
    assert np.array_equal(first.repeat_mape, second.repeat_mape)
    assert first.repeat_rmse.shape == (2,)


def test_three_features_ignore_coordinates(region):
    rng = np.random.RandomState(0)
    order = rng.permutation(len(region))
    shuffled = Network([dataclasses.replace(site, lat=region.sites[k].lat, lon=region.sites[k].lon)
                        for site, k in zip(region.sites, order)])
    for family, params in (('ols', {}), ('linear_svr', {'C': 2.0, 'epsilon': 0.1})):
        original = cross_validate(region, family, params, PLAN, FeatureSpec())
        moved = cross_validate(shuffled, family, params, PLAN, FeatureSpec())
        assert np.array_equal(original.repeat_rmse, moved.repeat_rmse)
        assert np.array_equal(original.repeat_mape, moved.repeat_mape)


def test_held_out_lag_only_sees_training_fold(region, monkeypatch):
    calls = []
    build_features = cv_module.build_features

    def recording(network, members, spec, lag_members=None):
        calls.append((np.asarray(members).copy(), None if lag_members is None else np.asarray(lag_members).copy()))
        return build_features(network, members, spec, lag_members=lag_members)

    monkeypatch.setattr(cv_module, 'build_features', recording)
    plan = CvPlan(repeats=2, folds=5, seed=0)
    cross_validate(region, 'ols', {}, plan, FeatureSpec(use_spatial_lag=True))

    assert len(calls) == 2 * plan.repeats * plan.folds
    active = set(region.active)
    for repeat in range(plan.repeats):
        tested = []
        for fold in range(plan.folds):
            (train, train_lag), (test, test_lag) = calls[2 * (repeat * plan.folds + fold):
                                                         2 * (repeat * plan.folds + fold) + 2]
            assert train_lag is None
            assert set(test_lag) == set(train)
            assert not set(test_lag) & set(test)
            assert set(train) | set(test) == active
            tested.extend(test.tolist())
        assert sorted(tested) == sorted(active)


def test_fold_failure_names_the_fold():
    network = affine_network(5)
    with pytest.raises(FoldFailure) as info:
        cross_validate(network, 'ols', {}, CvPlan(repeats=1, folds=2), FeatureSpec(use_spatial_lag=True))
    assert (info.value.repeat, info.value.fold) == (0, 0)


def test_zero_sales_site_is_left_out_of_mape(region):
    zero = region.active[0]
    sites = list(region.sites)
    sites[zero] = dataclasses.replace(sites[zero], addon_sales=0.0)
    network = Network(sites)
    plan = CvPlan(repeats=3, folds=5, seed=0)

    result = cross_validate(network, 'ols', {}, plan, FeatureSpec())
    assert result.dropped_repeats == 0
    assert result.mape_skipped == plan.repeats
    assert result.repeat_rmse.shape == (3,)
    assert np.isfinite(result.mean_mape) and np.isfinite(result.mean_rmse)


def test_failed_repeat_is_dropped(region, monkeypatch):
    calls = []
    fit_model = cv_module.fit_model

    def failing_first(*args, **kwargs):
        calls.append(1)
        if len(calls) == 1:
            raise SingularDesign('rank deficient')
        return fit_model(*args, **kwargs)

    monkeypatch.setattr(cv_module, 'fit_model', failing_first)
    result = cross_validate(region, 'ols', {}, PLAN, FeatureSpec())
    assert result.dropped_repeats == 1
    assert result.repeat_rmse.shape == (PLAN.repeats - 1,)
    assert result.as_row()['dropped_repeats'] == 1

    calls.clear()
    with pytest.raises(FoldFailure) as info:
        cross_validate(region, 'ols', {}, PLAN, FeatureSpec(), strict=True)
    assert (info.value.repeat, info.value.fold) == (0, 0)
    assert isinstance(info.value.cause, SingularDesign)


def test_single_cell_grid_is_capped(region):
    grid = Grid(C_values=(1.0,), epsilon_values=(0.5,))
    result = grid_search(region, 'linear_svr', grid, PLAN, FeatureSpec())
    assert result.best_params == {'C': 1.0, 'epsilon': 0.5}
    assert set(result.capped_axes) == {'C', 'epsilon'}
    assert len(result.table) == 1
    with pytest.raises(ExtensionCapReached) as info:
        grid_search(region, 'linear_svr', grid, PLAN, FeatureSpec(), strict=True)
    assert info.value.result.best_params == result.best_params


def test_epsilon_does_not_extend_below_zero():
    assert _extend('epsilon', 0.0, 0.1, -1) is None
    assert _extend('epsilon', 0.3, 0.1, -1) == pytest.approx(0.2)
    assert _extend('C', 4.0, 2.0, 1) == 8.0
    assert _extend('gamma', 1e-3, 10.0, -1) == pytest.approx(1e-4)


def test_search_walks_past_the_seed_range(region):
    grid = Grid(C_values=(2.0 ** -12, 2.0 ** -11), epsilon_values=(0.1,))
    result = grid_search(region, 'linear_svr', grid, PLAN, FeatureSpec())
    assert result.extensions['C'] >= 1
    assert result.best_params['C'] > 2.0 ** -11
    seed_cells = result.table[result.table['C'] <= 2.0 ** -11]
    assert result.best.mean_rmse <= seed_cells['mean_rmse'].min()
    assert 'C' not in result.capped_axes or result.extensions['C'] == 20


def test_ols_grid_has_one_cell(region):
    result = grid_search(region, 'ols', Grid(), PLAN, FeatureSpec())
    assert result.best_params == {}
    assert result.capped_axes == ()


def test_seed_grids():
    radial = Grid.seed_grid('radial_svr')
    assert radial.C_values[0] == 1.0 and radial.C_values[-1] == 2.0 ** 16
    assert radial.epsilon_values == tuple(round(0.1 * k, 10) for k in range(11))
    assert radial.gamma_values == pytest.approx((1e-7, 1e-6, 1e-5, 1e-4, 1e-3), rel=1e-12)
    assert Grid.seed_grid('linear_svr').gamma_values == ()


@parametrize('policy,p_value,use_lag', [('auto', 0.01, True), ('auto', 0.2, False), ('force-3', 0.01, False),
                                        ('force-4', 0.9, True)])
def test_feature_policies(policy, p_value, use_lag):
    assert resolve_feature_spec(policy, p_value).use_spatial_lag is use_lag


def _search(family, mean_rmse, params):
    best = CvResult(family=family, params=params, feature_spec=FeatureSpec(), mean_rmse=mean_rmse, sd_rmse=0.0,
                    mean_mape=1.0, sd_mape=0.0, repeat_rmse=np.array([mean_rmse]), repeat_mape=np.array([1.0]))
    return GridSearchResult(family=family, best_params=params, best=best, table=pd.DataFrame([best.as_row()]),
                            capped_axes=(), extensions={})


def test_ties_prefer_the_simpler_family(region):
    searches = {
        'radial_svr': _search('radial_svr', 10.0, {'C': 1.0, 'epsilon': 0.1, 'gamma': 0.1}),
        'linear_svr': _search('linear_svr', 10.0, {'C': 1.0, 'epsilon': 0.1}),
        'ols': _search('ols', 11.0, {}),
    }
    selection = select_model(region, PLAN, FeatureSpec(), searches=searches)
    assert selection.family == 'linear_svr'
    assert selection.model.family == 'linear_svr'
    assert selection.model.hyperparameters == {'C': 1.0, 'epsilon': 0.1}


def test_select_model_refits_on_all_active_sites(region):
    grids = {'linear_svr': Grid(C_values=(1.0, 2.0, 4.0), epsilon_values=(0.1, 0.2, 0.3))}
    selection = select_model(region, PLAN, FeatureSpec(use_spatial_lag=True), grids=grids,
                             families=('ols', 'linear_svr'))
    assert selection.family in ('ols', 'linear_svr')
    assert selection.model.feature_spec == FeatureSpec(use_spatial_lag=True)
    assert selection.cv.mean_rmse == min(search.best.mean_rmse for search in selection.searches.values())


def test_cv_table_layout(region):
    table, searches = cv_table(region, PLAN, families=('ols',))
    assert list(table.columns) == ['ols']
    assert table.index.names == ['statistic', 'features']
    assert ('Mean RMSE', '4 features') in table.index and ('SD MAPE', '3 features') in table.index
    assert len(table) == 8
    assert set(searches) == {True, False}
    assert table.loc[('Mean RMSE', '3 features'), 'ols'] == searches[False]['ols'].best.mean_rmse
