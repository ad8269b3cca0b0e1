import numpy as np
import pytest
from pytest import approx

from geodecomp import sphere
from geodecomp.errors import ValidationError, AntipodalError, ConvergenceError
from geodecomp.sphere import AmbientSpace, SphereSeries, inner, geo_dist, geo_dists, log_generator, log_generators, \
    generator_to_operator, rotate, remove, hs_inner, expm_apply, log_map, exp_map, frechet_mean, frechet_gradient, \
    frechet_objective, is_sphere_point
from tests.fixtures import random_unit, cap_points, sphere_grid, grid_frechet_mean

E1, E2, E3 = np.eye(3)


def random_triples(dim, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        center = random_unit(rng, dim)
        yield cap_points(rng, center, 3, (np.pi / 2 - 0.1) / 2)


class TestSphereSeries:
    def test_normalizes_rows(self):
        series = SphereSeries([[1 + 1e-8, 0, 0], [0, 1, 0]])
        assert np.linalg.norm(series[0]) == approx(1, abs=1e-15)
        assert len(series) == 2 and series.dim == 3
        assert series.ambient.kind == 'sphere'

    def test_off_sphere(self):
        with pytest.raises(ValidationError, match="point 2"):
            SphereSeries([[1, 0, 0], [0, 0.5, 0]])

    def test_too_short(self):
        with pytest.raises(ValidationError):
            SphereSeries([[1, 0, 0]])

    def test_ambient_mismatch(self):
        with pytest.raises(ValidationError):
            SphereSeries([[1, 0, 0], [0, 1, 0]], ambient=AmbientSpace.euclidean(4))

    def test_read_only(self):
        series = SphereSeries([[1, 0, 0], [0, 1, 0]])
        with pytest.raises(ValueError):
            series.points[0, 0] = 2

    def test_ambient_round_trip(self):
        ambient = AmbientSpace(dim=3, quadrature=[0.2, 0.3, 0.5], kind='density', grid=[0.1, 0.35, 0.75])
        restored = AmbientSpace.from_dict(ambient.to_dict())
        assert restored.kind == 'density'
        np.testing.assert_array_equal(restored.grid, ambient.grid)


class TestDistances:
    def test_inner(self):
        assert inner(E1, E2) == 0
        assert inner(E1, E1) == 1

    @pytest.mark.parametrize(['v1', 'v2', 'expected'], [
        (E1, E1, 0),
        (E1, E2, np.pi / 2),
        (E1, -E1, np.pi),
        (E1, np.array([np.sqrt(2) / 2, np.sqrt(2) / 2, 0]), np.pi / 4),
    ])
    def test_geo_dist(self, v1, v2, expected):
        assert geo_dist(v1, v2) == approx(expected, abs=1e-7)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError, match="dimension mismatch"):
            geo_dist(E1, np.array([1.0, 0]))

    def test_not_unit(self):
        with pytest.raises(ValidationError):
            geo_dist(E1, np.array([2.0, 0, 0]))

    def test_geo_dists_exact_zero(self):
        points = cap_points(np.random.default_rng(0), E3, 5, 0.5)
        np.testing.assert_array_equal(geo_dists(points, points), np.zeros(5))

    def test_geo_dists_matches_arccos(self):
        rng = np.random.default_rng(1)
        a, b = cap_points(rng, E1, 20, 1.0), cap_points(rng, E1, 20, 1.0)
        expected = [geo_dist(u, v) for u, v in zip(a, b)]
        np.testing.assert_allclose(geo_dists(a, b), expected, atol=1e-7)


class TestLogGenerator:
    def test_quarter_turn(self):
        generator = log_generator(E1, np.array([np.sqrt(2) / 2, np.sqrt(2) / 2, 0]))
        assert generator.eta == approx(np.pi / 4)
        np.testing.assert_allclose(generator.zeta1, E1)
        np.testing.assert_allclose(generator.zeta2, E2, atol=1e-12)

    def test_identical_points(self):
        generator = log_generator(E3, E3)
        assert generator.eta == 0
        assert generator.zeta2 @ E3 == approx(0, abs=1e-15)
        assert np.linalg.norm(generator.zeta2) == approx(1)

    def test_antipodal(self):
        with pytest.raises(AntipodalError):
            log_generator(E1, -E1)

    def test_batched_matches_single(self):
        rng = np.random.default_rng(2)
        base, targets = E1, cap_points(rng, E1, 10, 1.0)
        eta, zeta1, zeta2 = log_generators(base, targets)
        for index, target in enumerate(targets):
            generator = log_generator(base, target)
            assert eta[index] == approx(generator.eta, abs=1e-14)
            np.testing.assert_allclose(zeta2[index], generator.zeta2, atol=1e-12)

    def test_operator(self):
        operator = generator_to_operator(log_generator(E1, E2))
        expected = np.pi / 2 * (np.outer(E2, E1) - np.outer(E1, E2))
        np.testing.assert_allclose(operator, expected, atol=1e-15)
        assert hs_inner(operator, operator) == approx(2 * (np.pi / 2) ** 2)


class TestRotation:
    @pytest.mark.parametrize('dim', [3, 7])
    def test_moves_base_to_target(self, dim):
        for v1, v2, v3 in random_triples(dim, 500, seed=dim):
            np.testing.assert_allclose(rotate(log_generator(v2, v3), v2), v3, atol=1e-10)

    @pytest.mark.parametrize('dim', [3, 7])
    def test_preserves_inner_products(self, dim):
        for v1, v2, v3 in random_triples(dim, 500, seed=10 + dim):
            generator = log_generator(v2, v3)
            assert rotate(generator, v1) @ rotate(generator, v3) == approx(v1 @ v3, abs=1e-10)

    @pytest.mark.parametrize('dim', [3, 7])
    def test_removal_identities(self, dim):
        for a, b, c in random_triples(dim, 500, seed=20 + dim):
            np.testing.assert_allclose(remove(a, b, b), a, atol=1e-10)
            np.testing.assert_allclose(remove(b, b, c), c, atol=1e-10)

    @pytest.mark.parametrize('dim', [3, 7])
    def test_expm_matches_rotate(self, dim):
        for v1, v2, v3 in random_triples(dim, 200, seed=30 + dim):
            generator = log_generator(v2, v3)
            np.testing.assert_allclose(expm_apply(generator_to_operator(generator), v1), rotate(generator, v1),
                                       atol=1e-9)

    def test_zero_angle_is_exact(self):
        x = np.array([0.6, 0.8, 0])
        assert np.array_equal(rotate(log_generator(E1, E1), x), x)

    def test_expm_zero_operator(self):
        x = np.array([0.6, 0.8, 0])
        assert np.array_equal(expm_apply(np.zeros((3, 3)), x), x)

    def test_expm_rejects_symmetric(self):
        with pytest.raises(ValidationError, match="skew"):
            expm_apply(np.eye(3), E1)

    def test_hs_inner_shape_mismatch(self):
        with pytest.raises(ValidationError):
            hs_inner(np.zeros((3, 3)), np.zeros((2, 2)))


class TestTangentMaps:
    def test_exp_of_log(self):
        rng = np.random.default_rng(3)
        base = random_unit(rng, 5)
        points = cap_points(rng, base, 10, 1.2)
        for point, tangent in zip(points, log_map(base, points)):
            assert tangent @ base == approx(0, abs=1e-12)
            np.testing.assert_allclose(exp_map(base, tangent), point, atol=1e-12)

    def test_log_of_base(self):
        np.testing.assert_array_equal(log_map(E1, E1[None]), np.zeros((1, 3)))


class TestFrechetMean:
    def test_constant(self):
        points = np.tile(np.array([0.6, 0, 0.8]), (5, 1))
        assert np.array_equal(frechet_mean(points), points[0])

    def test_geodesic_midpoint(self):
        a, b = E1, np.array([0, 0.6, 0.8])
        expected = (a + b) / np.linalg.norm(a + b)
        np.testing.assert_allclose(frechet_mean(np.array([a, b, a, b])), expected, atol=1e-9)

    def test_grid_oracle(self):
        rng = np.random.default_rng(4)
        grid = sphere_grid(0.5)
        for _ in range(20):
            center = random_unit(rng, 3)
            points = cap_points(rng, center, 10, 0.8)
            weights = rng.uniform(0.1, 1, size=10)
            mean = frechet_mean(points, weights)
            oracle = grid_frechet_mean(points, weights, grid)
            assert is_sphere_point(mean)
            assert geo_dist(mean, oracle) < np.deg2rad(2)
            gradient = frechet_gradient(mean, points, weights / weights.sum())
            assert np.linalg.norm(gradient) <= 1e-8

    def test_negative_weights_stationary(self):
        rng = np.random.default_rng(5)
        points = cap_points(rng, E3, 12, 0.3)
        weights = np.linspace(-0.5, 2, 12)
        mean = frechet_mean(points, weights)
        assert np.linalg.norm(frechet_gradient(mean, points, weights / weights.sum())) <= 1e-8

    def test_objective_minimal(self):
        rng = np.random.default_rng(6)
        points = cap_points(rng, E2, 8, 0.5)
        weights = np.ones(8)
        mean = frechet_mean(points, weights)
        for neighbour in cap_points(rng, mean, 20, 1e-3):
            assert frechet_objective(mean, points, weights) <= frechet_objective(neighbour, points, weights)

    @pytest.mark.parametrize('weights', [np.array([1.0, -1.0]), np.array([-1.0, 0.5]), np.array([np.nan, 1.0])])
    def test_invalid_weights(self, weights):
        with pytest.raises(ValidationError):
            frechet_mean(np.array([E1, E2]), weights)

    def test_weight_count(self):
        with pytest.raises(ValidationError):
            frechet_mean(np.array([E1, E2]), np.ones(3))

    def test_stalled_line_search(self, monkeypatch):
        monkeypatch.setattr(sphere, '_MAX_HALVINGS', 0)
        with pytest.raises(ConvergenceError, match="stalled"):
            frechet_mean(np.array([E1, E2, E3]), np.array([1.0, 2.0, 3.0]))


class TestDocumentedExamples:
    def test_orthogonal_generator(self):
        generator = log_generator(E1, E2)
        assert generator.eta == approx(np.pi / 2)
        np.testing.assert_allclose(generator.zeta2, E2, atol=1e-15)

    def test_planar_operator(self):
        operator = generator_to_operator(log_generator(np.array([1.0, 0]), np.array([0, 1.0])))
        np.testing.assert_allclose(operator, [[0, -np.pi / 2], [np.pi / 2, 0]], atol=1e-15)

    @pytest.mark.parametrize(['x', 'expected'], [
        (E1, E2),
        (E3, E3),
        (np.array([np.sqrt(2) / 2, np.sqrt(2) / 2, 0]), np.array([-np.sqrt(2) / 2, np.sqrt(2) / 2, 0])),
    ])
    def test_quarter_rotation(self, x, expected):
        np.testing.assert_allclose(rotate(log_generator(E1, E2), x), expected, atol=1e-12)

    def test_remove_example(self):
        a = np.array([np.sqrt(2) / 2, np.sqrt(2) / 2, 0])
        np.testing.assert_allclose(remove(a, E1, E2), [-np.sqrt(2) / 2, np.sqrt(2) / 2, 0], atol=1e-12)

    def test_hs_inner_shared_base(self):
        rng = np.random.default_rng(7)
        base = random_unit(rng, 5)
        first, second = cap_points(rng, base, 2, 1.0)
        a, b = log_generator(base, first), log_generator(base, second)
        expected = 2 * a.eta * b.eta * (a.zeta2 @ b.zeta2)
        assert hs_inner(generator_to_operator(a), generator_to_operator(b)) == approx(expected, abs=1e-12)

    def test_expm_power_series(self):
        rng = np.random.default_rng(8)
        matrix = rng.standard_normal((6, 6)) * 0.3
        operator = matrix - matrix.T
        x = random_unit(rng, 6)
        term, total = x.copy(), x.copy()
        for order in range(1, 50):
            term = operator @ term / order
            total += term
        np.testing.assert_allclose(expm_apply(operator, x), total / np.linalg.norm(total), atol=1e-9)
