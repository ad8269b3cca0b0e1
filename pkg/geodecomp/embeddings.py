"""
Square-root embeddings of compositions and densities into the unit sphere, and their inverses.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from geodecomp.errors import ValidationError
from geodecomp.sphere import AmbientSpace, SphereSeries

_logger = logging.getLogger(__name__)

COMPOSITION_TOLERANCE = 1e-9
DENSITY_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class Composition:
    shares: np.ndarray

    def __post_init__(self):
        shares = np.asarray(self.shares, dtype=float)
        if shares.ndim != 1 or len(shares) < 2:
            raise ValidationError(f"composition needs a vector of at least 2 shares, got shape {shares.shape}")
        negative = np.flatnonzero(shares < 0)
        if len(negative) > 0:
            raise ValidationError(f"composition share {negative[0] + 1} is negative ({shares[negative[0]]:.6g})")
        if abs(shares.sum() - 1) > COMPOSITION_TOLERANCE:
            raise ValidationError(f"composition shares sum to {shares.sum():.12g}, not 1")
        object.__setattr__(self, 'shares', shares)


def midpoint_quadrature(grid):
    """ Bin widths of the cells whose midpoints are `grid`. """
    grid = np.asarray(grid, dtype=float)
    if len(grid) == 1:
        return np.ones(1)
    inner_edges = (grid[:-1] + grid[1:]) / 2
    edges = np.concatenate([[grid[0] - (grid[1] - grid[0]) / 2], inner_edges,
                            [grid[-1] + (grid[-1] - grid[-2]) / 2]])
    return np.diff(edges)


@dataclass(frozen=True, eq=False)
class DensityOnGrid:
    grid: np.ndarray
    values: np.ndarray
    quadrature: Optional[np.ndarray] = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or len(grid) < 2:
            raise ValidationError(f"density grid needs at least 2 points, got shape {grid.shape}")
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("density grid must be strictly increasing")
        if values.shape != grid.shape:
            raise ValidationError(f"{len(values)} density values for {len(grid)} grid points")
        quadrature = midpoint_quadrature(grid) if self.quadrature is None \
            else np.asarray(self.quadrature, dtype=float)
        if quadrature.shape != grid.shape or np.any(quadrature <= 0):
            raise ValidationError("quadrature weights must be positive, one per grid point")
        negative = np.flatnonzero(values < 0)
        if len(negative) > 0:
            raise ValidationError(f"density value {negative[0] + 1} is negative ({values[negative[0]]:.6g})")
        mass = values @ quadrature
        if abs(mass - 1) > DENSITY_TOLERANCE:
            raise ValidationError(f"density integrates to {mass:.9g}, not 1")
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'quadrature', quadrature)

    @property
    def ambient(self):
        return AmbientSpace(dim=len(self.grid), quadrature=self.quadrature, kind='density', grid=self.grid)


def _as_composition(c):
    return c if isinstance(c, Composition) else Composition(c)


def _positive_part_squared(v):
    v = np.asarray(v, dtype=float)
    if not np.any(v > 0):
        # the reflected point carries the same squared coordinates
        v = -v
    return np.clip(v, 0, None) ** 2


def smooth_composition(shares, eps=1e-6):
    """ Moves a composition into the open simplex by adding `eps` to every share and renormalizing. """
    shares = np.asarray(shares, dtype=float)
    if eps < 0:
        raise ValidationError(f"smoothing must be nonnegative, got {eps}")
    smoothed = shares + eps
    return smoothed / smoothed.sum(axis=-1, keepdims=True)


def comp_to_sphere(c):
    return np.sqrt(_as_composition(c).shares)


def sphere_to_comp(v) -> Composition:
    """
    Squares the coordinates and renormalizes to sum 1.
    Estimated points may leave the nonnegative orthant; negative coordinates are clamped to 0 before squaring.
    """
    squared = _positive_part_squared(v)
    return Composition(squared / squared.sum())


def density_to_sphere(d: DensityOnGrid):
    coordinates = np.sqrt(d.values * d.quadrature)
    return coordinates / np.linalg.norm(coordinates)


def sphere_to_density(v, grid, quadrature=None) -> DensityOnGrid:
    grid = np.asarray(grid, dtype=float)
    quadrature = midpoint_quadrature(grid) if quadrature is None else np.asarray(quadrature, dtype=float)
    if np.shape(v) != grid.shape:
        raise ValidationError(f"point has {np.size(v)} coordinates but the grid has {len(grid)} points")
    values = _positive_part_squared(v) / quadrature
    values = values / (values @ quadrature)
    return DensityOnGrid(grid=grid, values=values, quadrature=quadrature)


def histogram_to_density(counts, bin_edges) -> DensityOnGrid:
    counts = np.asarray(counts, dtype=float)
    bin_edges = np.asarray(bin_edges, dtype=float)
    if bin_edges.shape != (len(counts) + 1,):
        raise ValidationError(f"{len(counts)} bins need {len(counts) + 1} edges, got {bin_edges.size}")
    widths = np.diff(bin_edges)
    if np.any(widths <= 0):
        raise ValidationError("bin edges must be strictly increasing")
    if np.any(counts < 0) or np.any(counts != np.round(counts)):
        raise ValidationError("histogram counts must be nonnegative integers")
    total = counts.sum()
    if total == 0:
        raise ValidationError("histogram has no positive count")
    return DensityOnGrid(grid=(bin_edges[:-1] + bin_edges[1:]) / 2, values=counts / total / widths,
                         quadrature=widths)


def compositions_to_series(shares, smoothing=None) -> SphereSeries:
    shares = np.atleast_2d(np.asarray(shares, dtype=float))
    if smoothing is not None:
        shares = smooth_composition(shares, eps=smoothing)
    points = []
    for row, share in enumerate(shares, start=1):
        try:
            points.append(comp_to_sphere(share))
        except ValidationError as e:
            raise ValidationError(f"row {row}: {e}") from e
    return SphereSeries(np.array(points), ambient=AmbientSpace.euclidean(shares.shape[1], kind='composition'))


def histograms_to_series(counts, bin_edges) -> SphereSeries:
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    densities = []
    for row, count in enumerate(counts, start=1):
        try:
            densities.append(histogram_to_density(count, bin_edges))
        except ValidationError as e:
            raise ValidationError(f"row {row}: {e}") from e
    return SphereSeries(np.array([density_to_sphere(d) for d in densities]), ambient=densities[0].ambient)


def points_to_data(points, ambient: AmbientSpace):
    """ Maps points back to the data space named by `ambient.kind`: (n, G) array of shares, densities or coordinates. """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if ambient.kind == 'composition':
        return np.array([sphere_to_comp(point).shares for point in points])
    if ambient.kind == 'density':
        grid = ambient.grid if ambient.grid is not None else np.cumsum(ambient.quadrature) - ambient.quadrature / 2
        return np.array([sphere_to_density(point, grid, ambient.quadrature).values for point in points])
    return points.copy()


def series_to_data(series: SphereSeries):
    return points_to_data(series.points, series.ambient)
