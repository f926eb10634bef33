import dataclasses
import logging

import numpy as np
from sklearn.model_selection import KFold

from .metrics import rmse, mape
from ..demand_models import FeatureSpec, build_features, fit_model
from ..error import Error, FoldFailure
from ..seeding import np_random, child_seed

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class CvPlan:
    """Repeated k-fold cross validation; the default is 50 repeats of 10 folds."""
    repeats: int = 50
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        assert self.repeats >= 1, 'repeats should be >= 1'
        assert self.folds >= 2, 'folds should be >= 2'

    @classmethod
    def ci(cls, seed=0):
        return cls(repeats=5, folds=5, seed=seed)


@dataclasses.dataclass(frozen=True, eq=False)
class CvResult:
    family: str
    params: dict
    feature_spec: FeatureSpec
    mean_rmse: float
    sd_rmse: float
    mean_mape: float
    sd_mape: float
    repeat_rmse: np.ndarray
    repeat_mape: np.ndarray
    dropped_repeats: int = 0
    mape_skipped: int = 0

    def as_row(self):
        return dict(family=self.family, use_spatial_lag=self.feature_spec.use_spatial_lag, **self.params,
                    mean_rmse=self.mean_rmse, sd_rmse=self.sd_rmse, mean_mape=self.mean_mape, sd_mape=self.sd_mape,
                    dropped_repeats=self.dropped_repeats, mape_skipped=self.mape_skipped)


def cross_validate(network, family, params, plan: CvPlan, feature_spec: FeatureSpec, members=None, strict=False,
                   **solver_kwargs):
    """
    Repeated k-fold CV over the active sites (or `members`).

    Per repeat the fold-level test RMSE and MAPE are averaged; the result reports their mean and standard
    deviation across repeats. Training rows compute their spatial lag among the training fold, and each test
    site's lag is taken against the training fold only, so no test-fold sales leak into any feature.

    Held-out sites with zero add-on sales are left out of MAPE (counted in `mape_skipped`) but kept in RMSE.
    A failing fold drops its repeat with a warning (counted in `dropped_repeats`); FoldFailure is raised when
    every repeat fails, or on the first failure if `strict`.
    """
    members = np.asarray(network.active if members is None else members, dtype=int)
    assert len(members) >= plan.folds, '{} rows cannot fill {} folds'.format(len(members), plan.folds)

    rng = np_random(plan.seed, stream='cv')
    repeat_rmse, repeat_mape = [], []
    failure, skipped = None, 0
    for repeat in range(plan.repeats):
        splitter = KFold(n_splits=plan.folds, shuffle=True, random_state=child_seed(rng))
        try:
            fold_rmse, fold_mape, fold_skipped = _run_repeat(network, family, params, feature_spec, members,
                                                             splitter, repeat, solver_kwargs)
        except FoldFailure as exc:
            logger.warning('CV %s %s: dropping repeat %d: %s', family, params, repeat, exc)
            if strict:
                raise
            failure = exc
            continue
        skipped += fold_skipped
        repeat_rmse.append(np.mean(fold_rmse))
        repeat_mape.append(np.nanmean(fold_mape) if not np.all(np.isnan(fold_mape)) else np.nan)

    if not repeat_rmse:
        raise failure
    dropped = plan.repeats - len(repeat_rmse)
    if skipped:
        logger.warning('CV %s %s: %d held-out rows with zero add-on sales left out of MAPE', family, params,
                       skipped)

    repeat_rmse, repeat_mape = np.array(repeat_rmse), np.array(repeat_mape, dtype=float)
    ddof = 1 if len(repeat_rmse) > 1 else 0
    finite_mape = repeat_mape[~np.isnan(repeat_mape)]
    result = CvResult(family=family, params=dict(params), feature_spec=feature_spec,
                      mean_rmse=float(repeat_rmse.mean()), sd_rmse=float(repeat_rmse.std(ddof=ddof)),
                      mean_mape=float(finite_mape.mean()) if finite_mape.size else np.nan,
                      sd_mape=float(finite_mape.std(ddof=1 if finite_mape.size > 1 else 0))
                      if finite_mape.size else np.nan,
                      repeat_rmse=repeat_rmse, repeat_mape=repeat_mape, dropped_repeats=dropped,
                      mape_skipped=skipped)
    logger.debug('CV %s %s lag=%s: RMSE %.4g (sd %.3g), MAPE %.3g%%, %d repeats dropped', family, params,
                 feature_spec.use_spatial_lag, result.mean_rmse, result.sd_rmse, result.mean_mape, dropped)
    return result


def _run_repeat(network, family, params, feature_spec, members, splitter, repeat, solver_kwargs):
    fold_rmse, fold_mape, skipped = [], [], 0
    for fold, (train, test) in enumerate(splitter.split(members)):
        train_members, test_members = members[train], members[test]
        try:
            X_train, y_train = build_features(network, train_members, feature_spec)
            X_test, y_test = build_features(network, test_members, feature_spec, lag_members=train_members)
            model = fit_model(family, X_train, y_train, feature_spec=feature_spec, params=params,
                              **solver_kwargs)
            predictions = model.predict(X_test)
        except Error as exc:
            raise FoldFailure(repeat, fold, exc) from exc
        fold_rmse.append(rmse(predictions, y_test))
        nonzero = y_test != 0
        skipped += int(np.sum(~nonzero))
        fold_mape.append(mape(predictions[nonzero], y_test[nonzero]) if nonzero.any() else np.nan)
    return fold_rmse, fold_mape, skipped
