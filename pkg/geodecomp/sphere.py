import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm

from geodecomp.errors import ValidationError, AntipodalError, ConvergenceError

_logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-6
ZERO_ANGLE = 1e-9
ANTIPODAL_MARGIN = 1e-8
SKEW_TOLERANCE = 1e-10
_MAX_HALVINGS = 40
# a stalled line search is accepted while the gradient norm stays within this multiple of `tol`
STALL_GRADIENT = 10
_RENORMALIZE_TOLERANCE = 1e-12

AMBIENT_KINDS = ('sphere', 'composition', 'density')


@dataclass(frozen=True, eq=False)
class AmbientSpace:
    """
    Coordinate space of the sphere.
    Points are stored in orthonormalized coordinates, i.e. raw values multiplied by the square root of `quadrature`,
    so that the Hilbert inner product is the plain dot product.
    `kind` and `grid` only matter when mapping estimates back to compositions or densities.
    """
    dim: int
    quadrature: np.ndarray
    kind: str = 'sphere'
    grid: Optional[np.ndarray] = None

    def __post_init__(self):
        quadrature = np.asarray(self.quadrature, dtype=float)
        object.__setattr__(self, 'quadrature', quadrature)
        if self.dim < 2:
            raise ValidationError(f"ambient dimension must be at least 2, got {self.dim}")
        if quadrature.shape != (self.dim,):
            raise ValidationError(f"expected {self.dim} quadrature weights, got shape {quadrature.shape}")
        if np.any(quadrature <= 0):
            raise ValidationError("quadrature weights must be strictly positive")
        if self.kind not in AMBIENT_KINDS:
            raise ValidationError(f"unknown ambient kind {self.kind!r}, expected one of {AMBIENT_KINDS}")
        if self.grid is not None:
            grid = np.asarray(self.grid, dtype=float)
            if grid.shape != (self.dim,):
                raise ValidationError(f"expected {self.dim} grid points, got shape {grid.shape}")
            object.__setattr__(self, 'grid', grid)

    @classmethod
    def euclidean(cls, dim, kind='sphere'):
        return cls(dim=dim, quadrature=np.ones(dim), kind=kind)

    def to_dict(self):
        return {'dim': self.dim, 'kind': self.kind, 'quadrature': self.quadrature.tolist(),
                'grid': None if self.grid is None else self.grid.tolist()}

    @classmethod
    def from_dict(cls, values):
        return cls(dim=values['dim'], quadrature=values['quadrature'], kind=values.get('kind', 'sphere'),
                   grid=values.get('grid'))


@dataclass(frozen=True, eq=False)
class SphereSeries:
    """
    Equidistant series of points on the unit sphere, one row per time point.
    Rows are validated against the unit norm (within `UNIT_TOLERANCE`); rows off by more than 1e-12 are renormalized.
    """
    points: np.ndarray
    ambient: Optional[AmbientSpace] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim != 2:
            raise ValidationError(f"series must be a 2d array of points, got {points.ndim} dimensions")
        if len(points) < 2:
            raise ValidationError(f"series needs at least 2 points, got {len(points)}")
        ambient = self.ambient or AmbientSpace.euclidean(points.shape[1])
        if ambient.dim != points.shape[1]:
            raise ValidationError(f"points have {points.shape[1]} coordinates but the ambient space has {ambient.dim}")
        norms = np.linalg.norm(points, axis=1)
        off_sphere = np.flatnonzero(np.abs(norms - 1) > UNIT_TOLERANCE)
        if len(off_sphere) > 0:
            raise ValidationError(f"point {off_sphere[0] + 1} is not on the unit sphere (norm {norms[off_sphere[0]]:.6g})")
        drifted = np.abs(norms - 1) > _RENORMALIZE_TOLERANCE
        points[drifted] /= norms[drifted, None]
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'ambient', ambient)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, index):
        return self.points[index]

    def __iter__(self):
        return iter(self.points)

    @property
    def dim(self):
        return self.points.shape[1]

    def with_points(self, points):
        return SphereSeries(points, ambient=self.ambient)

    def window(self, start, stop):
        return SphereSeries(self.points[start:stop], ambient=self.ambient)


class Rank2Generator(NamedTuple):
    """ The generator `eta * (zeta2 zeta1^T - zeta1 zeta2^T)` of the rotation moving `zeta1` along a geodesic. """
    eta: float
    zeta1: np.ndarray
    zeta2: np.ndarray


def _as_point(v, name='point'):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValidationError(f"{name} must be a vector, got shape {v.shape}")
    return v


def _check_same_dim(u, v):
    if u.shape[-1] != v.shape[-1]:
        raise ValidationError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")


def _check_unit(v, name='point'):
    norm = np.linalg.norm(v)
    if abs(norm - 1) > UNIT_TOLERANCE:
        raise ValidationError(f"{name} is not on the unit sphere (norm {norm:.6g})")


def is_sphere_point(v, tolerance=1e-9):
    v = np.asarray(v, dtype=float)
    return v.ndim == 1 and abs(np.linalg.norm(v) - 1) <= tolerance


def normalize(v):
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValidationError("cannot normalize the zero vector")
    return v / norm


def inner(u, v):
    u, v = _as_point(u), _as_point(v)
    _check_same_dim(u, v)
    return float(u @ v)


def geo_dist(v1, v2):
    v1, v2 = _as_point(v1), _as_point(v2)
    _check_same_dim(v1, v2)
    _check_unit(v1, 'first point')
    _check_unit(v2, 'second point')
    return float(np.arccos(np.clip(v1 @ v2, -1.0, 1.0)))


def geo_dists(a, b):
    """
    Row-wise geodesic distances from the chord length, which is exact at coincident points.
    Either argument may be a single point.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    _check_same_dim(a, b)
    chord = np.linalg.norm(a - b, axis=-1)
    return 2 * np.arcsin(np.clip(chord / 2, 0.0, 1.0))


def _orthogonal_unit(v):
    index = int(np.argmin(np.abs(v)))
    direction = np.zeros_like(v)
    direction[index] = 1.0
    direction = direction - (direction @ v) * v
    return direction / np.linalg.norm(direction)


def log_generators(base, targets):
    """
    Batched `log_generator`: generators moving each row of `base` to the matching row of `targets`.
    `base` may be a single point shared by all targets.

    :return: (eta, zeta1, zeta2) arrays of shapes (n,), (n, G), (n, G)
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    base = np.asarray(base, dtype=float)
    _check_same_dim(base, targets)
    base = np.array(np.broadcast_to(base, targets.shape))
    cosine = np.einsum('ij,ij->i', base, targets)
    residual = targets - cosine[:, None] * base
    sine = np.linalg.norm(residual, axis=1)
    eta = np.arctan2(sine, cosine)
    antipodal = np.flatnonzero(eta > np.pi - ANTIPODAL_MARGIN)
    if len(antipodal) > 0:
        raise AntipodalError(f"transport direction undefined for antipodal points (index {antipodal[0]}, "
                             f"angle {eta[antipodal[0]]:.12f})")
    zero = eta < ZERO_ANGLE
    eta = np.where(zero, 0.0, eta)
    zeta2 = np.empty_like(residual)
    zeta2[~zero] = residual[~zero] / sine[~zero, None]
    for index in np.flatnonzero(zero):
        zeta2[index] = _orthogonal_unit(base[index])
    return eta, base, zeta2


def log_generator(v2, v3) -> Rank2Generator:
    v2, v3 = _as_point(v2), _as_point(v3)
    _check_same_dim(v2, v3)
    _check_unit(v2, 'base point')
    _check_unit(v3, 'target point')
    eta, zeta1, zeta2 = log_generators(v2, v3[None])
    return Rank2Generator(float(eta[0]), zeta1[0], zeta2[0])


def generator_to_operator(generator: Rank2Generator):
    return generator.eta * (np.outer(generator.zeta2, generator.zeta1) - np.outer(generator.zeta1, generator.zeta2))


def generators_to_operators(eta, zeta1, zeta2):
    return eta[:, None, None] * (np.einsum('ni,nj->nij', zeta2, zeta1) - np.einsum('ni,nj->nij', zeta1, zeta2))


def rotate(generator: Rank2Generator, x):
    """ Closed-form exponential of a rank-2 generator applied to `x`, without forming a dense matrix. """
    x = _as_point(x)
    _check_same_dim(generator.zeta1, x)
    if generator.eta == 0.0:
        return x.copy()
    along_first, along_second = generator.zeta1 @ x, generator.zeta2 @ x
    sine, versine = np.sin(generator.eta), 1.0 - np.cos(generator.eta)
    rotated = (x + generator.zeta1 * (-sine * along_second - versine * along_first)
               + generator.zeta2 * (sine * along_first - versine * along_second))
    return rotated / np.linalg.norm(rotated)


def remove(a, b, c):
    """
    Removal operation: the rotation carrying `b` to `c`, applied to `a`.
    Transports the gap between `b` and `a` to the reference point `c`.
    """
    return rotate(log_generator(b, c), a)


def hs_inner(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"operator shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def check_skew(operator, tolerance=SKEW_TOLERANCE):
    operator = np.asarray(operator, dtype=float)
    if operator.ndim != 2 or operator.shape[0] != operator.shape[1]:
        raise ValidationError(f"operator must be a square matrix, got shape {operator.shape}")
    asymmetry = np.max(np.abs(operator + operator.T)) if operator.size else 0.0
    if asymmetry > tolerance:
        raise ValidationError(f"operator is not skew-symmetric (max |A + A^T| = {asymmetry:.3g})")
    return operator


def expm_apply(operator, x):
    operator = check_skew(operator)
    x = _as_point(x)
    if operator.shape[0] != x.shape[0]:
        raise ValidationError(f"dimension mismatch: operator {operator.shape[0]} vs point {x.shape[0]}")
    if not np.any(operator):
        return x.copy()
    rotated = expm(operator) @ x
    return rotated / np.linalg.norm(rotated)


def log_map(base, points):
    """ Tangent vectors at `base` pointing to each of `points`, scaled to the geodesic distance. """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cosine = points @ base
    residual = points - cosine[:, None] * base
    sine = np.linalg.norm(residual, axis=1)
    angle = np.arctan2(sine, cosine)
    scale = np.divide(angle, sine, out=np.zeros_like(angle), where=sine > 0)
    return residual * scale[:, None]


def exp_map(base, tangent):
    length = np.linalg.norm(tangent)
    if length == 0:
        return np.array(base, dtype=float)
    point = np.cos(length) * base + np.sin(length) * (tangent / length)
    return point / np.linalg.norm(point)


def frechet_objective(point, points, weights):
    return float(np.asarray(weights) @ geo_dists(points, point) ** 2)


def frechet_gradient(point, points, weights):
    """ Intrinsic gradient of `sum_t w_t d^2(point, y_t)`. """
    return -2 * np.asarray(weights) @ log_map(point, points)


def frechet_mean(points, weights=None, tol=1e-9, max_iter=500):
    """
    Weighted Fréchet mean on the sphere by intrinsic (Karcher) gradient descent.

    Starts from the normalized extrinsic average and moves along the exponential map with unit step,
    halving the step whenever the objective would increase.
    Weights may be negative as long as their sum is positive; only stationarity is certified then.

    :param points: (n, G) array of unit vectors
    :param weights: n finite weights, equal weights by default
    :param tol: convergence threshold on the angle of the full step
    :param max_iter: iteration cap before raising `ConvergenceError`, also raised when step halving stalls short
        of the tolerance
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0 or points.size == 0:
        raise ValidationError("cannot average an empty set of points")
    weights = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (len(points),):
        raise ValidationError(f"expected {len(points)} weights, got shape {weights.shape}")
    if not np.all(np.isfinite(weights)):
        raise ValidationError("weights must be finite")
    total = weights.sum()
    if not total > 0:
        raise ValidationError(f"weights must have a positive sum, got {total}")
    if np.all(points == points[0]):
        return points[0].copy()
    weights = weights / total

    extrinsic = weights @ points
    norm = np.linalg.norm(extrinsic)
    mean = points[np.argmax(weights)].copy() if norm < 1e-12 else extrinsic / norm
    objective = frechet_objective(mean, points, weights)
    for iteration in range(max_iter):
        step = weights @ log_map(mean, points)
        angle = np.linalg.norm(step)
        if angle < tol:
            _logger.debug(f"Fréchet mean converged after {iteration} iterations")
            return mean
        scale = 1.0
        for _ in range(_MAX_HALVINGS):
            candidate = exp_map(mean, scale * step)
            candidate_objective = frechet_objective(candidate, points, weights)
            if candidate_objective <= objective:
                break
            scale /= 2
        else:
            gradient = np.linalg.norm(frechet_gradient(mean, points, weights))
            if gradient > STALL_GRADIENT * tol:
                raise ConvergenceError(f"Fréchet mean stalled after {iteration} iterations with gradient norm "
                                       f"{gradient:.3g}")
            _logger.debug(f"Fréchet mean stalled at gradient norm {gradient:.3g} after {iteration} iterations")
            return mean
        mean, objective = candidate, candidate_objective
    raise ConvergenceError(f"Fréchet mean did not converge within {max_iter} iterations")
