import warnings

import numpy as np
import pytest

from geodecomp.errors import ValidationError, SimulationError
from geodecomp.evaluation import CVConfig, training_count, rolling_windows, cv_scores, rolling_cv, bandwidth_grid, \
    select_bandwidth, feasible_orders, select_order, EvalReport, evaluate_models, evaluate_simulation, imse, \
    estimation_study
from geodecomp.models.baselines import fit_sar, forecast_sar
from geodecomp.simulation import SimConfig, simulate
from geodecomp.sphere import SphereSeries, geo_dists
from tests.fixtures import constant_series, geodesic_series


def curved_series(T=100):
    angles = 0.5 * np.sin(2 * np.pi * np.arange(1, T + 1) / T)
    return SphereSeries(np.column_stack([np.cos(angles), np.sin(angles), np.zeros(T)]))


class TestWindows:
    def test_example(self):
        assert rolling_windows(10, 0.5) == [(4, 9, 9), (3, 8, 8), (2, 7, 7), (1, 6, 6), (0, 5, 5)]

    @pytest.mark.parametrize('T', [10, 37, 120])
    @pytest.mark.parametrize('kappa', [0.2, 0.5, 0.8])
    def test_properties(self, T, kappa):
        windows = rolling_windows(T, kappa)
        count = training_count(T, kappa)
        assert len(windows) == count
        for start, stop, target in windows:
            assert stop - start == T - count
            assert target == stop
            assert 0 <= start and target < T
        assert windows[0][2] == T - 1

    def test_training_count_rounding(self):
        assert training_count(10, 0.3) == 3
        assert training_count(120, 0.9) == 108

    @pytest.mark.parametrize(['T', 'kappa'], [(5, 0.2), (10, 1.0), (10, 0)])
    def test_invalid(self, T, kappa):
        with pytest.raises(ValidationError):
            rolling_windows(T, kappa)

    def test_cv_config(self):
        with pytest.raises(ValidationError):
            CVConfig(candidates=())
        assert CVConfig(candidates=(1, 2)).kappa == 0.2


class TestRollingCV:
    def test_tie_picks_smallest(self):
        series = geodesic_series(T=20)
        assert rolling_cv(series, [3, 1, 2], lambda train, candidate: train[-1], 0.5) == 1

    def test_known_winner(self):
        series = geodesic_series(T=20)
        assert rolling_cv(series, [3, 1, 2], lambda train, candidate: train[-candidate], 0.5) == 1
        assert rolling_cv(series, [1, 2], lambda train, candidate: train[-1] if candidate == 2 else train[0], 0.5) == 2

    def test_scores(self):
        series = geodesic_series(T=20, amplitude=0.4)
        scores = cv_scores(series, [1], lambda train, candidate: train[-1], 0.5)
        assert scores[1] == pytest.approx(0.02, abs=1e-9)

    def test_prepare_runs_per_window(self):
        series = geodesic_series(T=20)
        prepared = []

        def prepare(train):
            prepared.append(len(train))
            return train

        rolling_cv(series, [1, 2, 3], lambda train, candidate: train[-1], 0.5, prepare=prepare, n_jobs=1)
        assert prepared == [10] * 10

    def test_no_candidates(self):
        with pytest.raises(ValidationError):
            rolling_cv(geodesic_series(), [], lambda train, candidate: train[-1], 0.5)


class TestBandwidth:
    def test_grid(self):
        grid = bandwidth_grid(100, n=10, max_bandwidth=10.0)
        assert len(grid) == 10
        assert grid[0] == pytest.approx(0.5 * 100 ** (-1 / 5))
        assert grid[-1] == pytest.approx(4 * 100 ** (-1 / 5))

    def test_grid_clipped(self):
        grid = bandwidth_grid(20, n=10, max_bandwidth=0.5)
        assert max(grid) == 0.5
        assert list(grid) == sorted(set(grid))

    def test_prefers_local_fit_on_curved_trend(self):
        assert select_bandwidth(curved_series(), candidates=(0.08, 1.0), kappa=0.2) == 0.08

    def test_config(self):
        assert select_bandwidth(curved_series(), candidates=(1.0,), config=CVConfig(candidates=(0.08, 1.0))) == 0.08

    def test_default_grid(self):
        h = select_bandwidth(geodesic_series(T=40), kappa=0.2)
        assert h in bandwidth_grid(32)


class TestOrder:
    def test_feasible_orders(self):
        assert feasible_orders('SAR', 10) == [1, 2, 3, 4]
        assert feasible_orders('DSAR', 10) == [1, 2, 3, 4]
        assert feasible_orders('SAR', 100, max_order=3) == [1, 2, 3]

    def test_infeasible_candidates(self):
        with pytest.raises(ValidationError, match="cannot be fitted"):
            select_order(geodesic_series(T=20), 'SAR', candidates=[9], kappa=0.5)

    def test_selects_feasible_order(self):
        bundle = simulate(SimConfig(T=50, seed=1))
        order = select_order(bundle.y, 'SAR', kappa=0.2, max_order=3)
        assert order in (1, 2, 3)

    def test_tpsar_with_known_period(self):
        bundle = simulate(SimConfig(T=60, seed=2))
        order = select_order(bundle.y, 'TPSAR', candidates=[1, 2], kappa=0.2, h=0.5, period=12)
        assert order in (1, 2)

    def test_config(self):
        bundle = simulate(SimConfig(T=50, seed=1))
        assert select_order(bundle.y, 'SAR', candidates=[1], config=CVConfig(candidates=(2,), max_order=3)) == 2
        with pytest.raises(ValidationError, match="cannot be fitted"):
            select_order(bundle.y, 'SAR', config=CVConfig(candidates=(5,), max_order=3))


class TestEvaluateModels:
    def test_constant_series(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            report = evaluate_models(constant_series(T=20), kappa=0.8, h=0.3, order=1)
        assert report.horizons == [1, 2, 3, 4]
        for model in ['TPSAR', 'SAR', 'DSAR']:
            np.testing.assert_array_equal(report.errors[model], np.zeros(4))

    def test_single_step_error(self):
        series = simulate(SimConfig(T=30, seed=3)).y
        report = evaluate_models(series, kappa=0.8, models=('SAR',), order=1)
        forecast = forecast_sar(fit_sar(series.window(5, 29), 1), 1)[0]
        assert report.errors['SAR'][0] == pytest.approx(float(geo_dists(forecast, series[29])), abs=1e-12)
        assert len(report.errors['SAR']) == 6

    def test_report(self):
        report = EvalReport(errors={'SAR': np.array([0.1, 0.2]), 'DSAR': np.array([0.3, 0.4])})
        frame = report.to_frame()
        assert list(frame.columns) == ['horizon', 'SAR', 'DSAR']
        assert list(frame['horizon']) == [1, 2]
        assert report.to_dict()['errors']['DSAR'] == [0.3, 0.4]

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            evaluate_models(constant_series(T=4), kappa=0.2, order=1)


class TestSimulationStudies:
    def test_evaluate_simulation(self):
        report = evaluate_simulation(SimConfig(T=40), 2, models=('TPSAR', 'SAR', 'DSAR'), kappa=0.8, h=0.5,
                                     order=1, n_jobs=1, period=12)
        assert report.replicates == 2
        assert report.horizons == list(range(1, 9))
        assert report.config['rejected'] == []
        assert all(np.all(errors >= 0) for errors in report.errors.values())

    def test_rejected_replicates(self):
        with pytest.warns(UserWarning, match="skipping"), pytest.raises(SimulationError):
            evaluate_simulation(SimConfig(T=40, trend_amplitude=3), 2, models=('SAR',), order=1, n_jobs=1)

    def test_imse(self):
        points = np.eye(3)
        assert imse(points, points) == 0
        assert imse(points[:1], points[1:2]) == pytest.approx((np.pi / 2) ** 2)

    def test_estimation_study(self):
        frame, summary = estimation_study(SimConfig(T=60), 3, 0.5, known_period=True, n_jobs=1)
        assert list(frame['replicate']) == [0, 1, 2]
        assert summary['period_recovery'] == 1.0
        assert summary['replicates'] == 3
        for key in ['median_imse_trend', 'median_imse_periodic', 'median_imse_residuals', 'phi1_mse']:
            assert summary[key] >= 0
        assert 'phi1_bias' in summary
        assert set(frame.columns) >= {'period', 'retest_period', 'imse_trend', 'phi1', 'phi1_error', 'degenerate'}


@pytest.mark.slow
@pytest.mark.parametrize('phi', [(0.3,), (0.3, -0.1), (0.3, -0.1, 0.4)])
def test_tpsar_outperforms_baselines(phi):
    report = evaluate_simulation(SimConfig(T=120, phi=phi), 50, kappa=0.9, h=0.5, max_order=3)
    tpsar = report.errors['TPSAR']
    for m in range(6, 13):
        assert tpsar[m - 1] < report.errors['SAR'][m - 1]
        assert tpsar[m - 1] < report.errors['DSAR'][m - 1]
    assert tpsar[-1] >= tpsar[0]
    assert np.mean(tpsar[6:]) >= np.mean(tpsar[:6])


@pytest.mark.slow
def test_estimation_improves_with_length():
    summaries = {T: estimation_study(SimConfig(T=T), 20, 0.5, known_period=True)[1] for T in [120, 300, 600]}
    for column in ['median_imse_trend', 'median_imse_periodic', 'median_imse_residuals']:
        assert summaries[120][column] > summaries[300][column] > summaries[600][column]
    assert -0.06 <= summaries[120]['phi1_bias'] < 0
    assert summaries[120]['phi1_mse'] <= 0.01
