import logging
from dataclasses import dataclass, field

import numpy as np

from geodecomp.errors import ValidationError, DegenerateBandwidthError
from geodecomp.sphere import SphereSeries, frechet_mean

_logger = logging.getLogger(__name__)

DEGENERATE_VARIANCE = 1e-14


def _gaussian(x):
    return np.exp(-x ** 2 / 2) / np.sqrt(2 * np.pi)


def _epanechnikov(x):
    return np.where(np.abs(x) <= 1, 0.75 * (1 - x ** 2), 0.0)


KERNELS = {
    'gaussian': _gaussian,
    'epanechnikov': _epanechnikov,
}


def get_kernel(kernel):
    if callable(kernel):
        return kernel
    if kernel not in KERNELS:
        raise ValidationError(f"unknown kernel {kernel!r}, expected one of {list(KERNELS)}")
    return KERNELS[kernel]


def local_weights(u, T, h, kernel='gaussian'):
    """
    Local-linear weights of the design points t/T, t = 1..T, at the evaluation position `u`.
    The weights satisfy `mean(w) = 1` and `mean(w * (t/T - u)) = 0`.

    :param u: evaluation position, may lie beyond 1 for extrapolation
    :param T: number of design points
    :param h: kernel bandwidth
    :param kernel: name in `KERNELS` or a callable
    """
    if not h > 0:
        raise ValidationError(f"bandwidth must be positive, got {h}")
    if T < 2:
        raise ValidationError(f"local weights need at least 2 design points, got {T}")
    kernel = get_kernel(kernel)
    offsets = np.arange(1, T + 1) / T - u
    scaled = kernel(offsets / h) / h
    tau0, tau1, tau2 = (np.mean(scaled * offsets ** power) for power in range(3))
    variance = tau0 * tau2 - tau1 ** 2
    if variance < DEGENERATE_VARIANCE:
        raise DegenerateBandwidthError(f"bandwidth {h} is too small to fit a local line at u={u} "
                                       f"(sigma^2 = {variance:.3g})")
    return scaled * (tau2 - tau1 * offsets) / variance


@dataclass(eq=False)
class TrendFit:
    """
    Local Fréchet regression estimate of the trend, evaluated lazily and memoized per position.
    """
    series: SphereSeries
    bandwidth: float
    kernel: str = 'gaussian'
    tol: float = 1e-9
    max_iter: int = 500
    values: dict = field(default_factory=dict, repr=False)

    def __call__(self, u):
        u = float(u)
        if u not in self.values:
            weights = local_weights(u, len(self.series), self.bandwidth, self.kernel)
            self.values[u] = frechet_mean(self.series.points, weights, tol=self.tol, max_iter=self.max_iter)
        return self.values[u]

    def path(self, positions):
        return np.array([self(u) for u in positions])

    def fitted(self):
        """ The trend at the design points t/T. """
        T = len(self.series)
        return self.path(np.arange(1, T + 1) / T)


def estimate_trend(series: SphereSeries, h, kernel='gaussian', tol=1e-9, max_iter=500) -> TrendFit:
    if not 0 < h <= 1:
        raise ValidationError(f"bandwidth must lie in (0, 1], got {h}")
    get_kernel(kernel)
    return TrendFit(series=series, bandwidth=h, kernel=kernel, tol=tol, max_iter=max_iter)
