import numpy as np

from geodecomp.sphere import SphereSeries, exp_map


def random_unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def cap_points(rng, center, count, radius):
    """ `count` random points within geodesic distance `radius` of `center`. """
    points = []
    for _ in range(count):
        tangent = rng.standard_normal(len(center))
        tangent -= (tangent @ center) * center
        tangent *= rng.uniform(0, radius) / np.linalg.norm(tangent)
        points.append(exp_map(center, tangent))
    return np.array(points)


def periodic_points(period=4, cycles=4, spread=0.3):
    angles = 2 * np.pi * np.arange(period) / period
    cycle = np.column_stack([np.full(period, np.cos(spread)),
                             np.sin(spread) * np.cos(angles), np.sin(spread) * np.sin(angles)])
    return np.tile(cycle, (cycles, 1)), cycle


def periodic_series(period=4, cycles=4, spread=0.3):
    return SphereSeries(periodic_points(period, cycles, spread)[0])


def constant_series(T=20, dim=3):
    point = np.ones(dim) / np.sqrt(dim)
    return SphereSeries(np.tile(point, (T, 1)))


def geodesic_series(T=60, amplitude=0.3, dim=3):
    """ Points moving at constant speed along the great circle through e1 and e2. """
    angles = amplitude * np.arange(1, T + 1) / T
    points = np.zeros((T, dim))
    points[:, 0], points[:, 1] = np.cos(angles), np.sin(angles)
    return SphereSeries(points)


def sphere_grid(step_degrees=0.5):
    polar = np.deg2rad(np.arange(0, 180 + step_degrees / 2, step_degrees))
    azimuth = np.deg2rad(np.arange(0, 360, step_degrees))
    polar, azimuth = np.meshgrid(polar, azimuth, indexing='ij')
    return np.column_stack([(np.sin(polar) * np.cos(azimuth)).ravel(), (np.sin(polar) * np.sin(azimuth)).ravel(),
                            np.cos(polar).ravel()])


def grid_frechet_mean(points, weights, grid):
    """ Brute-force minimizer of the weighted squared geodesic distance over the grid points. """
    distances = np.arccos(np.clip(grid @ points.T, -1, 1))
    return grid[np.argmin(distances ** 2 @ weights)]
