import logging
from dataclasses import dataclass

import numpy as np

from geodecomp.config import DEFAULT_SETTINGS
from geodecomp.errors import ValidationError
from geodecomp.models.autoregression import LogSeries, ARCoefficients, log_series, fit_log_ar, forecast_operators
from geodecomp.sphere import SphereSeries, expm_apply, remove
from geodecomp.stpd import SeriesDecomposition, decompose

_logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FittedTPSAR:
    decomposition: SeriesDecomposition
    logseries: LogSeries
    coeffs: ARCoefficients
    autocov: np.ndarray
    degenerate: bool = False

    identifier = 'TPSAR'

    @property
    def series(self):
        return self.decomposition.series


def tpsar_from_decomposition(decomposition: SeriesDecomposition, p, settings=DEFAULT_SETTINGS) -> FittedTPSAR:
    """ AR(p) fit on the log operators of the decomposition residuals about their Fréchet mean. """
    ls = log_series(decomposition.residuals, decomposition.mu_R2)
    fit = fit_log_ar(ls, p, condition_max=settings.condition_max)
    _logger.debug(f"TPSAR({p}) coefficients {fit.coeffs.phi}")
    return FittedTPSAR(decomposition=decomposition, logseries=ls, coeffs=fit.coeffs, autocov=fit.autocov,
                       degenerate=fit.degenerate)


def fit_tpsar(series: SphereSeries, h, period_config=None, p=1, period=None, theta_max=None,
              settings=DEFAULT_SETTINGS) -> FittedTPSAR:
    if not 1 <= p < len(series) / 2:
        raise ValidationError(f"AR order must lie in [1, {len(series) / 2:g}), got {p}")
    decomposition = decompose(series, h, config=period_config, period=period, theta_max=theta_max,
                              settings=settings)
    return tpsar_from_decomposition(decomposition, p, settings=settings)


def forecast_tpsar(model: FittedTPSAR, m):
    """
    m-step forecasts: the residual operator recursion is mapped onto μ_R2,
    then the periodic component and the extrapolated trend are transported back in.

    :return: (m, G) array of forecast points
    """
    decomposition = model.decomposition
    T = len(decomposition.series)
    operators = forecast_operators(model.logseries.ops, model.logseries.mean, model.coeffs, m)
    forecasts = []
    for j, operator in enumerate(operators, start=1):
        residual = expm_apply(operator, decomposition.mu_R2)
        detrended = remove(residual, decomposition.mu_R1, decomposition.periodic_at(T + j))
        forecasts.append(remove(detrended, decomposition.mu_Y, decomposition.trend_at(T + j)))
    return np.array(forecasts)
