import numpy as np

from ..error import ZeroActual


def rmse(predictions, actuals):
    predictions, actuals = _paired(predictions, actuals)
    return float(np.sqrt(np.mean((predictions - actuals) ** 2)))


def mape(predictions, actuals):
    """Mean absolute percent error, in percent."""
    predictions, actuals = _paired(predictions, actuals)
    zeros = np.flatnonzero(actuals == 0)
    if zeros.size:
        raise ZeroActual(int(zeros[0]))
    return float(np.mean(np.abs(predictions - actuals) / np.abs(actuals)) * 100)


def _paired(predictions, actuals):
    predictions = np.asarray(predictions, dtype=float).reshape(-1)
    actuals = np.asarray(actuals, dtype=float).reshape(-1)
    assert predictions.size == actuals.size, 'got {} predictions for {} actuals'.format(predictions.size,
                                                                                       actuals.size)
    assert predictions.size >= 1, 'metrics need at least one pair'
    return predictions, actuals
