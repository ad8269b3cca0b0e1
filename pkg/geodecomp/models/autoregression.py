"""
Autoregression on sphere-valued series through their skew-symmetric log operators.
Shared by the decomposition-based model and the two baselines.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_toeplitz, toeplitz

from geodecomp.errors import ValidationError, SingularSystemError
from geodecomp.sphere import SphereSeries, log_generators, generators_to_operators

_logger = logging.getLogger(__name__)

STATIONARITY_MARGIN = 1e-10
RESIDUAL_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class LogSeries:
    """
    Log operators Ξ_t of a series taken at a reference point, with their elementwise average.
    For increment series the reference is the last observation, from which forecasts are composed.
    """
    ops: np.ndarray
    base: np.ndarray
    mean: np.ndarray

    def __len__(self):
        return len(self.ops)

    def centered(self):
        return self.ops - self.mean


@dataclass(frozen=True, eq=False)
class ARCoefficients:
    phi: np.ndarray

    def __post_init__(self):
        phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        if phi.ndim != 1 or len(phi) < 1:
            raise ValidationError(f"AR coefficients need at least one entry, got shape {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValidationError(f"AR coefficients must be finite, got {phi}")
        object.__setattr__(self, 'phi', phi)

    @property
    def order(self):
        return len(self.phi)

    @classmethod
    def zeros(cls, p):
        return cls(np.zeros(p))


class ARFit(NamedTuple):
    coeffs: ARCoefficients
    autocov: np.ndarray
    degenerate: bool


def _points(series):
    return series.points if isinstance(series, SphereSeries) else np.atleast_2d(np.asarray(series, dtype=float))


def log_series(residuals, base) -> LogSeries:
    eta, zeta1, zeta2 = log_generators(np.asarray(base, dtype=float), _points(residuals))
    ops = generators_to_operators(eta, zeta1, zeta2)
    return LogSeries(ops=ops, base=np.array(base, dtype=float), mean=ops.mean(axis=0))


def increment_log_series(series) -> LogSeries:
    """ Generators Ξ_t moving y_{t-1} to y_t, for t = 2..T. """
    points = _points(series)
    if len(points) < 2:
        raise ValidationError(f"increments need at least 2 points, got {len(points)}")
    eta, zeta1, zeta2 = log_generators(points[:-1], points[1:])
    ops = generators_to_operators(eta, zeta1, zeta2)
    return LogSeries(ops=ops, base=points[-1].copy(), mean=ops.mean(axis=0))


def autocov(ls: LogSeries, k):
    n = len(ls)
    if not 0 <= k < n:
        raise ValidationError(f"lag must lie in [0, {n - 1}], got {k}")
    centered = ls.centered()
    return float(np.einsum('nij,nij->', centered[:n - k], centered[k:]) / (n - k))


def autocovariances(ls: LogSeries, p):
    return np.array([autocov(ls, k) for k in range(p + 1)])


def yule_walker(rho, condition_max=1e12) -> ARCoefficients:
    """
    Solves the Toeplitz system of autocovariances rho_0..rho_p for the AR coefficients.

    :raises SingularSystemError: when the Toeplitz matrix is singular or its condition number exceeds `condition_max`
    """
    rho = np.asarray(rho, dtype=float)
    p = len(rho) - 1
    if p < 1:
        raise ValidationError(f"Yule-Walker needs autocovariances up to lag 1 at least, got {len(rho)} values")
    if p == 1:
        if rho[0] == 0:
            raise SingularSystemError("lag-0 autocovariance is zero")
        return ARCoefficients(np.array([rho[1] / rho[0]]))
    matrix, rhs = toeplitz(rho[:-1]), rho[1:]
    condition = np.linalg.cond(matrix)
    if not np.isfinite(condition) or condition >= condition_max:
        raise SingularSystemError(f"Toeplitz autocovariance matrix is ill-conditioned (condition {condition:.3g})")
    phi = solve_toeplitz(rho[:-1], rhs)
    if np.linalg.norm(matrix @ phi - rhs) > RESIDUAL_TOLERANCE * np.linalg.norm(rhs):
        phi = np.linalg.solve(matrix, rhs)
    return ARCoefficients(phi)


def check_stationarity(phi) -> bool:
    """ Whether every root of 1 - phi_1 z - ... - phi_p z^p lies outside the unit circle. """
    phi = phi.phi if isinstance(phi, ARCoefficients) else np.atleast_1d(np.asarray(phi, dtype=float))
    if not np.any(phi):
        return True
    roots = np.roots(np.concatenate([-phi[::-1], [1.0]]))
    return bool(np.all(np.abs(roots) > 1 + STATIONARITY_MARGIN))


def max_order(length):
    """ Largest AR order fittable on a log series of the given length. """
    return (length - 1) // 2


def fit_log_ar(ls: LogSeries, p, condition_max=1e12) -> ARFit:
    """
    Yule-Walker fit of an AR(p) model on a log series.
    Constant or otherwise singular series are flagged as degenerate with all coefficients set to zero.
    """
    if not 1 <= p <= max_order(len(ls)):
        raise ValidationError(f"AR order must lie in [1, {max_order(len(ls))}] for {len(ls)} log operators, got {p}")
    rho = autocovariances(ls, p)
    scale = np.mean(np.einsum('nij,nij->n', ls.ops, ls.ops))
    if rho[0] <= 1e-24 + 1e-14 * scale:
        reason = f"log series is constant (rho_0 = {rho[0]:.3g})"
    else:
        try:
            return ARFit(coeffs=yule_walker(rho, condition_max=condition_max), autocov=rho, degenerate=False)
        except SingularSystemError as e:
            reason = str(e)
    warnings.warn(f"degenerate AR({p}) fit, coefficients set to zero: {reason}")
    _logger.warning(f"Degenerate AR({p}) fit: {reason}")
    return ARFit(coeffs=ARCoefficients.zeros(p), autocov=rho, degenerate=True)


def forecast_operators(ops, mean, phi, m):
    """
    m-step operator recursion Ξ_{n+j} = mean + sum_l phi_l (Ξ_{n+j-l} - mean),
    feeding earlier forecasts back in once observations run out.
    """
    if m < 1:
        raise ValidationError(f"forecast horizon must be at least 1, got {m}")
    phi = phi.phi if isinstance(phi, ARCoefficients) else np.asarray(phi, dtype=float)
    if len(ops) < len(phi):
        raise ValidationError(f"AR({len(phi)}) recursion needs at least {len(phi)} operators, got {len(ops)}")
    history = list(ops[len(ops) - len(phi):])
    forecasts = []
    for _ in range(m):
        forecast = mean + sum(coefficient * (history[-lag] - mean) for lag, coefficient in enumerate(phi, start=1))
        history.append(forecast)
        forecasts.append(forecast)
    return np.array(forecasts)
