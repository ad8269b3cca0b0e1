"""
Periodic component of the decomposition: phase-wise Fréchet regression, the penalised residual sum of squares
over candidate periods and the information criterion choosing the penalty.
"""
import logging
import warnings
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from geodecomp.config import DEFAULT_SETTINGS, worker_count
from geodecomp.errors import ValidationError
from geodecomp.sphere import SphereSeries, frechet_mean, geo_dists, remove

_logger = logging.getLogger(__name__)


def phase_index(t, theta):
    if t < 1 or theta < 1:
        raise ValidationError(f"phase index needs t >= 1 and theta >= 1, got t={t}, theta={theta}")
    return t + theta - theta * ((t + theta - 1) // theta)


def phase_indices(T, theta):
    """ `phase_index(t, theta)` for t = 1..T. """
    return np.arange(T) % theta + 1


def _check_theta(theta, T):
    if not 1 <= theta <= T:
        raise ValidationError(f"period must lie in [1, {T}], got {theta}")


def global_regression_weights(theta, T):
    """
    Global Fréchet regression weights of the one-hot phase design:
    row t holds s_i^{(t)} = x_t^T (X^T X)^{-1} x_i for i = 1..T.
    """
    _check_theta(theta, T)
    design = np.zeros((T, theta))
    design[np.arange(T), phase_indices(T, theta) - 1] = 1
    return design @ np.linalg.solve(design.T @ design, design.T)


def _points(series):
    return series.points if isinstance(series, SphereSeries) else np.asarray(series, dtype=float)


def phase_means(series, theta, tol=1e-9, max_iter=500):
    """ Equal-weight Fréchet mean of each phase class, (theta, G). """
    points = _points(series)
    _check_theta(theta, len(points))
    phases = phase_indices(len(points), theta)
    means = []
    for phase in range(1, theta + 1):
        members = points[phases == phase]
        means.append(frechet_mean(members, np.ones(len(members)), tol=tol, max_iter=max_iter))
    return np.array(means)


def fit_periodic_model(series, theta, tol=1e-9, max_iter=500):
    """ Fitted periodic values ĝ_t(theta, T) for t = 1..T; equal phases share one value. """
    points = _points(series)
    cycle = phase_means(points, theta, tol=tol, max_iter=max_iter)
    return cycle[phase_indices(len(points), theta) - 1]


def rss(series, theta, tol=1e-9, max_iter=500):
    points = _points(series)
    fitted = fit_periodic_model(points, theta, tol=tol, max_iter=max_iter)
    return float(np.sum(geo_dists(points, fitted) ** 2))


def rss_curve(series, theta_max, tol=1e-9, max_iter=500, n_jobs=None):
    """ RSS(theta) for theta = 1..theta_max, each candidate fitted independently in a worker pool. """
    points = _points(series)
    thetas = range(1, theta_max + 1)
    values = Parallel(n_jobs=n_jobs or worker_count())(
        delayed(rss)(points, theta, tol=tol, max_iter=max_iter) for theta in thetas)
    return dict(zip(thetas, values))


def default_theta_max(T, cap=40):
    if T < 4:
        raise ValidationError(f"period search needs at least 4 points, got {T}")
    return int(min(max(T // 3, 2), cap, T // 2))


def penalty_scale(T, h):
    return float(abs(np.log(1 / h)) / np.sqrt(T * h))


@dataclass(frozen=True)
class PeriodSearchConfig:
    theta_max: int
    lambda_grid: tuple
    penalty_scale: float

    def validate(self, T):
        if not 2 <= self.theta_max <= T / 2:
            raise ValidationError(f"theta_max must lie in [2, {T / 2:g}], got {self.theta_max}")
        if len(self.lambda_grid) == 0:
            raise ValidationError("lambda grid is empty")
        grid = np.asarray(self.lambda_grid)
        if np.any(grid <= 0) or np.any(np.diff(grid) < 0):
            raise ValidationError("lambda grid must be positive and sorted")
        return self


def lambda_grid(rss_one, n=50, ratio=1e-4, floor=1e-300):
    top = max(rss_one, floor)
    return tuple(np.geomspace(ratio * top, top, n).tolist())


def make_search_config(series, h, theta_max=None, curve=None, settings=DEFAULT_SETTINGS) -> PeriodSearchConfig:
    """ Default search over periods up to min(T // 3, 40) with a λ grid anchored at RSS(1). """
    points = _points(series)
    T = len(points)
    theta_max = theta_max or default_theta_max(T, cap=settings.theta_max_cap)
    rss_one = curve[1] if curve is not None else rss(points, 1, **settings.solver)
    config = PeriodSearchConfig(theta_max=theta_max,
                                lambda_grid=lambda_grid(rss_one, n=settings.n_lambda, ratio=settings.lambda_ratio,
                                                        floor=settings.rss_floor),
                                penalty_scale=penalty_scale(T, h))
    return config.validate(T)


def _penalised_argmin(curve, theta_max, lam):
    thetas = np.arange(1, theta_max + 1)
    objective = np.array([curve[theta] for theta in thetas]) + lam * thetas
    return int(thetas[np.argmin(objective)])


def estimate_period(series, config: PeriodSearchConfig, lam, curve=None, settings=DEFAULT_SETTINGS):
    """ argmin over theta in 1..theta_max of RSS(theta) + lam * theta, smallest theta on ties. """
    if not lam > 0:
        raise ValidationError(f"penalty must be positive, got {lam}")
    if curve is None:
        curve = rss_curve(series, config.theta_max, **settings.solver)
    return _penalised_argmin(curve, config.theta_max, lam)


def information_criterion(rss_value, T, theta, scale, floor=1e-300):
    return float(np.log(max(rss_value, floor) / T) + theta * scale)


def select_lambda(series, config: PeriodSearchConfig, curve=None, settings=DEFAULT_SETTINGS):
    """
    Picks the penalty minimizing log(RSS(θ̂_λ)/T) + θ̂_λ·ℓ(T) over the configured grid.

    :return: (lambda_hat, ic_curve) with ic_curve mapping each λ to its criterion value
    """
    points = _points(series)
    if curve is None:
        curve = rss_curve(points, config.theta_max, **settings.solver)
    T = len(points)
    ic_curve, floored = {}, False
    for lam in config.lambda_grid:
        theta = _penalised_argmin(curve, config.theta_max, lam)
        floored |= curve[theta] < settings.rss_floor
        ic_curve[lam] = information_criterion(curve[theta], T, theta, config.penalty_scale, floor=settings.rss_floor)
    if floored:
        warnings.warn(f"RSS vanished for a selected period, information criterion floored at {settings.rss_floor:g}")
    lambdas = list(ic_curve)
    lambda_hat = lambdas[int(np.argmin([ic_curve[lam] for lam in lambdas]))]
    return lambda_hat, ic_curve


def estimate_periodic_component(series, theta_hat, tol=1e-9, max_iter=500):
    """ One cycle ĝ(1..theta_hat); ĝ(l + k * theta_hat) = ĝ(l). """
    return phase_means(series, theta_hat, tol=tol, max_iter=max_iter)


def cycle_value(cycle, t):
    """ Periodic component at 1-based time `t`, extending the cycle periodically. """
    return cycle[phase_index(t, len(cycle)) - 1]


def deseasonalize(series: SphereSeries, cycle, mu_R1) -> SphereSeries:
    cycle = np.atleast_2d(cycle)
    if len(cycle) == 0:
        raise ValidationError("periodic cycle is empty")
    points = [remove(point, cycle_value(cycle, t), mu_R1) for t, point in enumerate(series, start=1)]
    return series.with_points(np.array(points))
