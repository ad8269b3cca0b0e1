"""
Baselines without decomposition: SAR logs the series at its Fréchet mean,
DSAR models the generators between consecutive observations.
"""
import logging
from dataclasses import dataclass

import numpy as np

from geodecomp.config import DEFAULT_SETTINGS
from geodecomp.errors import ValidationError
from geodecomp.models.autoregression import LogSeries, ARCoefficients, log_series, increment_log_series, \
    fit_log_ar, forecast_operators
from geodecomp.sphere import SphereSeries, expm_apply
from geodecomp.stpd import series_frechet_mean

_logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FittedBaseline:
    identifier: str
    series: SphereSeries
    logseries: LogSeries
    coeffs: ARCoefficients
    autocov: np.ndarray
    degenerate: bool = False


def fit_sar(series: SphereSeries, p, settings=DEFAULT_SETTINGS) -> FittedBaseline:
    mu_Y = series_frechet_mean(series, **settings.solver)
    ls = log_series(series, mu_Y)
    fit = fit_log_ar(ls, p, condition_max=settings.condition_max)
    return FittedBaseline(identifier='SAR', series=series, logseries=ls, coeffs=fit.coeffs, autocov=fit.autocov,
                          degenerate=fit.degenerate)


def fit_dsar(series: SphereSeries, p, settings=DEFAULT_SETTINGS) -> FittedBaseline:
    if len(series) < p + 2:
        raise ValidationError(f"DSAR({p}) needs at least {p + 2} points, got {len(series)}")
    ls = increment_log_series(series)
    fit = fit_log_ar(ls, p, condition_max=settings.condition_max)
    return FittedBaseline(identifier='DSAR', series=series, logseries=ls, coeffs=fit.coeffs, autocov=fit.autocov,
                          degenerate=fit.degenerate)


def forecast_sar(model: FittedBaseline, m):
    operators = forecast_operators(model.logseries.ops, model.logseries.mean, model.coeffs, m)
    return np.array([expm_apply(operator, model.logseries.base) for operator in operators])


def forecast_dsar(model: FittedBaseline, m):
    """ Composes the forecast increments onto the last observation, one rotation per step. """
    operators = forecast_operators(model.logseries.ops, model.logseries.mean, model.coeffs, m)
    current, forecasts = model.logseries.base, []
    for operator in operators:
        current = expm_apply(operator, current)
        forecasts.append(current)
    return np.array(forecasts)
