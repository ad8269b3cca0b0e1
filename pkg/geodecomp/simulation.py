"""
Ground-truth generator: a stationary autoregression of log operators at a base point,
then a periodic component, then a geodesic trend, each transported in relative to the base point.
"""
import logging
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from geodecomp.errors import ValidationError, SimulationError
from geodecomp.models.autoregression import check_stationarity
from geodecomp.sphere import SphereSeries, expm_apply, remove, normalize

_logger = logging.getLogger(__name__)

BURN_IN = 200


@dataclass(frozen=True)
class SimConfig:
    dim: int = 7
    T: int = 120
    theta0: int = 12
    phi: tuple = (0.5,)
    noise_scale: float = 0.1
    trend_amplitude: float = 0.3
    periodic_amplitude: float = 0.15
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'phi', tuple(float(coefficient) for coefficient in np.atleast_1d(self.phi)))
        if self.dim < 3:
            raise ValidationError(f"simulation needs at least 3 dimensions, got {self.dim}")
        if self.T < 2:
            raise ValidationError(f"simulation needs at least 2 time points, got {self.T}")
        if self.theta0 < 1:
            raise ValidationError(f"period must be at least 1, got {self.theta0}")
        if not check_stationarity(self.phi):
            raise ValidationError(f"AR coefficients {self.phi} are not stationary")
        for name in ['noise_scale', 'trend_amplitude', 'periodic_amplitude']:
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self):
        values = asdict(self)
        values['phi'] = list(self.phi)
        return values

    @classmethod
    def from_dict(cls, values):
        unknown = set(values) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown simulation settings: {sorted(unknown)}")
        return cls(**values)


@dataclass(eq=False)
class SimulationBundle:
    y: SphereSeries
    R1: SphereSeries
    R2: SphereSeries
    f_path: np.ndarray
    g_cycle: np.ndarray
    base: np.ndarray
    config: SimConfig
    replicate: int = 0
    trend: Optional[object] = field(default=None, repr=False)

    def g_path(self):
        T = len(self.y)
        return self.g_cycle[np.arange(T) % len(self.g_cycle)]


def replicate_rng(seed, replicate=0):
    """ Independent counter-based stream per (seed, replicate). """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replicate])))


def base_point(dim):
    return np.ones(dim) / np.sqrt(dim)


def _random_tangents(base, count, rng):
    """ `count` orthonormal tangent vectors at `base`. """
    directions = rng.standard_normal((count, len(base)))
    tangents = []
    for direction in directions:
        direction = direction - (direction @ base) * base
        for tangent in tangents:
            direction = direction - (direction @ tangent) * tangent
        tangents.append(normalize(direction))
    return np.array(tangents)


def gen_ar_residuals(config: SimConfig, rng=None):
    """
    Stationary residuals R2_t = Exp(Ξ_t) base, where Ξ_t follows the operator autoregression with zero mean,
    driven by rank-2 noise of half-normal magnitude along a random tangent direction.
    """
    rng = rng or replicate_rng(config.seed)
    base = base_point(config.dim)
    phi, p = np.asarray(config.phi), len(config.phi)
    total = config.T + BURN_IN
    operators = np.zeros((total + p, config.dim, config.dim))
    for t in range(p, total + p):
        direction = _random_tangents(base, 1, rng)[0]
        magnitude = abs(rng.normal(0, 1)) * config.noise_scale
        noise = magnitude * (np.outer(direction, base) - np.outer(base, direction))
        operators[t] = np.tensordot(phi, operators[t - p:t][::-1], axes=1) + noise
    residuals = np.array([expm_apply(operator, base) for operator in operators[-config.T:]])
    series = SphereSeries(residuals)
    _check_hemisphere(base, series)
    return series, base


def gen_periodic_cycle(config: SimConfig, base, rng=None):
    """ theta0 points on a small circle of radius `periodic_amplitude` about `base`, at angles 2 pi l / theta0. """
    rng = rng or replicate_rng(config.seed)
    first, second = _random_tangents(base, 2, rng)
    if config.theta0 == 1:
        return base[None].copy()
    radius = config.periodic_amplitude
    angles = 2 * np.pi * np.arange(1, config.theta0 + 1) / config.theta0
    offsets = np.cos(angles)[:, None] * first + np.sin(angles)[:, None] * second
    return np.cos(radius) * base + np.sin(radius) * offsets


def trend_path(config: SimConfig, base, rng=None):
    """
    Geodesic trend through `base` along a random tangent direction, spanning `trend_amplitude` radians over [0, 1].

    :return: (trend function of u, trend at t/T for t = 1..T)
    """
    rng = rng or replicate_rng(config.seed)
    direction = _random_tangents(base, 1, rng)[0]
    amplitude = config.trend_amplitude

    def trend(u):
        angle = (u - 0.5) * amplitude
        return np.cos(angle) * base + np.sin(angle) * direction

    return trend, np.array([trend(t / config.T) for t in range(1, config.T + 1)])


def impose_periodic(R2: SphereSeries, cycle, ref) -> SphereSeries:
    """ Inverse of deseasonalizing: R1_t = Exp(T_{ref, g(t)}) R2_t. """
    cycle = np.atleast_2d(cycle)
    points = [remove(point, ref, cycle[(t - 1) % len(cycle)]) for t, point in enumerate(R2, start=1)]
    return R2.with_points(np.array(points))


def impose_trend(R1: SphereSeries, f_path, ref) -> SphereSeries:
    """ Inverse of detrending: y_t = Exp(T_{ref, f(t/T)}) R1_t. """
    f_path = np.atleast_2d(f_path)
    if len(f_path) != len(R1):
        raise ValidationError(f"trend path has {len(f_path)} points for a series of length {len(R1)}")
    points = [remove(point, ref, trend) for point, trend in zip(R1, f_path)]
    return R1.with_points(np.array(points))


def _check_hemisphere(base, *series):
    """ Every series stays within a quarter circle of itself and of the base point. """
    smallest = min(min(float(np.min(s.points @ s.points.T)), float(np.min(s.points @ base))) for s in series)
    if smallest < 0:
        raise SimulationError(f"simulated points spread beyond a quarter circle (min inner product {smallest:.3g}), "
                              f"reduce the noise or the amplitudes")


def simulate(config: SimConfig, replicate=0) -> SimulationBundle:
    """ Residuals, then periodicity, then trend, from one stream keyed by (seed, replicate). """
    rng = replicate_rng(config.seed, replicate)
    R2, base = gen_ar_residuals(config, rng)
    cycle = gen_periodic_cycle(config, base, rng)
    trend, f_path = trend_path(config, base, rng)
    R1 = impose_periodic(R2, cycle, base)
    y = impose_trend(R1, f_path, base)
    _check_hemisphere(base, y, R1, R2)
    return SimulationBundle(y=y, R1=R1, R2=R2, f_path=f_path, g_cycle=cycle, base=base, config=config,
                           replicate=replicate, trend=trend)


def truth_dict(bundle: SimulationBundle):
    return {
        'config': bundle.config.to_dict(),
        'replicate': bundle.replicate,
        'theta0': bundle.config.theta0,
        'phi': list(bundle.config.phi),
        'base': bundle.base.tolist(),
        'f_path': bundle.f_path.tolist(),
        'g_cycle': bundle.g_cycle.tolist(),
    }
