"""
Spherical trend-periodicity decomposition.

The removal order is fixed: the trend is transported out first, then the periodic component,
each relative to the Fréchet mean of the series it is removed from.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from geodecomp.config import DEFAULT_SETTINGS
from geodecomp.errors import ValidationError
from geodecomp.sphere import SphereSeries, frechet_mean, remove
from geodecomp.stpd.periodicity import PeriodSearchConfig, make_search_config, rss_curve, select_lambda, \
    estimate_period, estimate_periodic_component, deseasonalize, cycle_value, default_theta_max
from geodecomp.stpd.trend import TrendFit, estimate_trend

_logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SeriesDecomposition:
    trend: TrendFit
    mu_Y: np.ndarray
    mu_R1: np.ndarray
    mu_R2: np.ndarray
    period: int
    cycle: np.ndarray
    detrended: SphereSeries
    residuals: SphereSeries
    rss_curve: dict = field(default_factory=dict)
    ic_curve: dict = field(default_factory=dict)
    lambda_hat: Optional[float] = None
    ic_floored: bool = False

    @property
    def series(self):
        return self.trend.series

    def trend_at(self, t):
        """ f̂(t/T) at 1-based time `t`, extrapolating beyond T. """
        return self.trend(t / len(self.series))

    def periodic_at(self, t):
        return cycle_value(self.cycle, t)


def series_frechet_mean(series, tol=1e-9, max_iter=500):
    points = series.points if isinstance(series, SphereSeries) else np.asarray(series, dtype=float)
    if len(points) == 0:
        raise ValidationError("cannot average an empty series")
    return frechet_mean(points, np.ones(len(points)), tol=tol, max_iter=max_iter)


def detrend(series: SphereSeries, trend: TrendFit, mu_Y) -> SphereSeries:
    T = len(series)
    points = [remove(point, trend(t / T), mu_Y) for t, point in enumerate(series, start=1)]
    return series.with_points(np.array(points))


def decompose(series: SphereSeries, h, config: Optional[PeriodSearchConfig] = None, period=None,
              theta_max=None, kernel=None, settings=DEFAULT_SETTINGS) -> SeriesDecomposition:
    """
    Runs the full decomposition: trend estimation, detrending, period selection, periodic component estimation
    and deseasonalizing.

    :param h: trend bandwidth, also used by the period-selection penalty
    :param config: period search configuration, built from the detrended series by default
    :param period: known period; skips the period search when given
    :param theta_max: largest candidate period for the default search configuration
    """
    solver = settings.solver
    trend = estimate_trend(series, h, kernel=kernel or settings.kernel, **solver)
    mu_Y = series_frechet_mean(series, **solver)
    detrended = detrend(series, trend, mu_Y)

    curve, ic_curve, lambda_hat, floored = {}, {}, None, False
    if period is None:
        if config is None:
            theta_max = theta_max or default_theta_max(len(series), cap=settings.theta_max_cap)
            curve = rss_curve(detrended, theta_max, **solver)
            config = make_search_config(detrended, h, theta_max=theta_max, curve=curve, settings=settings)
        else:
            curve = rss_curve(detrended, config.validate(len(series)).theta_max, **solver)
        lambda_hat, ic_curve = select_lambda(detrended, config, curve=curve, settings=settings)
        period = estimate_period(detrended, config, lambda_hat, curve=curve, settings=settings)
        floored = curve[period] < settings.rss_floor
    elif not 1 <= period <= len(series):
        raise ValidationError(f"period must lie in [1, {len(series)}], got {period}")
    _logger.info(f"Decomposing series of length {len(series)} with bandwidth {h}: period {period}")

    mu_R1 = series_frechet_mean(detrended, **solver)
    cycle = estimate_periodic_component(detrended, period, **solver)
    residuals = deseasonalize(detrended, cycle, mu_R1)
    mu_R2 = series_frechet_mean(residuals, **solver)
    return SeriesDecomposition(trend=trend, mu_Y=mu_Y, mu_R1=mu_R1, mu_R2=mu_R2, period=int(period), cycle=cycle,
                               detrended=detrended, residuals=residuals, rss_curve=curve, ic_curve=ic_curve,
                               lambda_hat=lambda_hat, ic_floored=bool(floored))


def retest_period(decomposition: SeriesDecomposition, config: Optional[PeriodSearchConfig] = None, theta_max=None,
                  settings=DEFAULT_SETTINGS):
    """ Reruns the period search on the final residuals; a fully decomposed series yields period 1. """
    residuals = decomposition.residuals
    if config is None:
        theta_max = theta_max or default_theta_max(len(residuals), cap=settings.theta_max_cap)
        curve = rss_curve(residuals, theta_max, **settings.solver)
        config = make_search_config(residuals, decomposition.trend.bandwidth, theta_max=theta_max, curve=curve,
                                    settings=settings)
    else:
        curve = rss_curve(residuals, config.validate(len(residuals)).theta_max, **settings.solver)
    lambda_hat, _ = select_lambda(residuals, config, curve=curve, settings=settings)
    return estimate_period(residuals, config, lambda_hat, curve=curve, settings=settings)
