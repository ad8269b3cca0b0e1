"""
Rolling-window cross-validation of bandwidths and AR orders, multi-horizon forecast evaluation
and Monte Carlo studies over simulated replicates.
"""
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from geodecomp.config import DEFAULT_SETTINGS, worker_count
from geodecomp.errors import ValidationError, SimulationError
from geodecomp.models import model_pool
from geodecomp.models.tpsar import tpsar_from_decomposition
from geodecomp.simulation import SimConfig, simulate
from geodecomp.sphere import SphereSeries, geo_dists
from geodecomp.stpd import decompose, retest_period
from geodecomp.stpd.trend import estimate_trend

_logger = logging.getLogger(__name__)

MODELS = ('TPSAR', 'SAR', 'DSAR')


@dataclass(frozen=True)
class CVConfig:
    """ Training fraction, candidates and order cap of one rolling cross-validation. """
    kappa: float = 0.2
    candidates: tuple = ()
    max_order: int = 20

    def __post_init__(self):
        if not 0 < self.kappa < 1:
            raise ValidationError(f"kappa must lie in (0, 1), got {self.kappa}")
        if len(self.candidates) == 0:
            raise ValidationError("cross-validation needs at least one candidate")
        if self.max_order < 1:
            raise ValidationError(f"max_order must be positive, got {self.max_order}")


def training_count(T, kappa):
    """ floor(T * kappa), robust to the representation error of `kappa`. """
    if not 0 < kappa < 1:
        raise ValidationError(f"kappa must lie in (0, 1), got {kappa}")
    return int(np.floor(T * kappa + 1e-9))


def rolling_windows(T, kappa):
    """
    0-based (start, stop, target) triples: for t1 = 1..floor(T kappa) the window series[start:stop]
    predicts series[target] one step ahead.
    """
    count = training_count(T, kappa)
    if count < 2:
        raise ValidationError(f"rolling cross-validation needs floor(T * kappa) >= 2, got {count} (T={T})")
    return [(count - t1, T - t1, T - t1) for t1 in range(1, count + 1)]


def _window_errors(series, start, stop, target, candidates, fit_and_predict, prepare):
    train = series.window(start, stop)
    prepared = prepare(train) if prepare is not None else train
    return [float(geo_dists(fit_and_predict(prepared, candidate), series[target])) for candidate in candidates]


def cv_scores(series: SphereSeries, candidates, fit_and_predict, kappa, prepare=None, n_jobs=None):
    """ Mean one-step geodesic error of each candidate over the rolling windows. """
    candidates = sorted(candidates)
    windows = rolling_windows(len(series), kappa)
    errors = Parallel(n_jobs=n_jobs or worker_count())(
        delayed(_window_errors)(series, start, stop, target, candidates, fit_and_predict, prepare)
        for start, stop, target in windows)
    errors = np.array(errors)
    return {candidate: float(np.mean(errors[:, index])) for index, candidate in enumerate(candidates)}


def rolling_cv(series: SphereSeries, candidates, fit_and_predict, kappa, prepare=None, n_jobs=None):
    """
    Candidate with the smallest mean one-step error, the smallest candidate on ties.

    :param fit_and_predict: function (training window or its prepared form, candidate) -> predicted next point
    :param prepare: optional candidate-independent preprocessing of each training window
    """
    if len(candidates) == 0:
        raise ValidationError("cross-validation needs at least one candidate")
    scores = cv_scores(series, candidates, fit_and_predict, kappa, prepare=prepare, n_jobs=n_jobs)
    _logger.debug(f"Cross-validation scores: {scores}")
    ordered = list(scores)
    return ordered[int(np.argmin([scores[candidate] for candidate in ordered]))]


def bandwidth_grid(T, n=10, max_bandwidth=0.5):
    """ `n` log-spaced bandwidths between 0.5 and 4 times T^(-1/5), clipped to `max_bandwidth`. """
    grid = np.geomspace(0.5, 4, n) * T ** (-1 / 5)
    return tuple(np.unique(np.minimum(grid, max_bandwidth)).tolist())


def _extrapolate_trend(kernel, settings):
    def predict(train, h):
        trend = estimate_trend(train, h, kernel=kernel, **settings.solver)
        return trend(1 + 1 / len(train))

    return predict


def select_bandwidth(series: SphereSeries, candidates=None, kappa=None, kernel=None, settings=DEFAULT_SETTINGS,
                     config: CVConfig = None):
    """
    Bandwidth whose trend extrapolated one step past each window predicts the next point best.

    :param config: training fraction and candidate bandwidths, taking precedence over `candidates` and `kappa`
    """
    if config is None:
        kappa = kappa or settings.cv_kappa
        window = len(series) - training_count(len(series), kappa)
        candidates = candidates or bandwidth_grid(window, settings.n_bandwidths, settings.max_bandwidth)
        config = CVConfig(kappa=kappa, candidates=tuple(candidates), max_order=settings.max_order)
    bandwidth = rolling_cv(series, config.candidates, _extrapolate_trend(kernel or settings.kernel, settings),
                           config.kappa)
    _logger.info(f"Selected bandwidth {bandwidth}")
    return bandwidth


def _forecast_one(spec, settings):
    def predict(prepared, p):
        return spec.forecast(spec.fit_prepared(prepared, p, settings=settings), 1)[0]

    return predict


def _prepare_window(spec, h, settings, prepare_kwargs):
    def prepare(train):
        return spec.prepare(train, h, settings=settings, **prepare_kwargs)

    return prepare


def feasible_orders(model, length, max_order=20):
    return list(range(1, min(max_order, model_pool[model].max_order(length)) + 1))


def select_order(series: SphereSeries, model, candidates=None, kappa=None, h=None, max_order=None,
                 settings=DEFAULT_SETTINGS, config: CVConfig = None, **prepare_kwargs):
    """
    AR order of `model` by rolling cross-validation; each window is prepared once (decomposed for TPSAR)
    and shared across the candidate orders.

    :param config: training fraction, candidate orders and order cap, taking precedence over the keyword arguments
    """
    spec = model_pool[model]
    if config is not None:
        candidates, kappa, max_order = list(config.candidates), config.kappa, config.max_order
    kappa = kappa or settings.cv_kappa
    max_order = max_order or settings.max_order
    window = len(series) - training_count(len(series), kappa)
    feasible = feasible_orders(model, window, max_order=max_order)
    if candidates is None:
        candidates = feasible
    infeasible = [p for p in candidates if p not in feasible]
    if infeasible or not candidates:
        raise ValidationError(f"{model} orders {infeasible or candidates} cannot be fitted on windows of length "
                              f"{window}, feasible orders are {feasible}")
    config = CVConfig(kappa=kappa, candidates=tuple(candidates), max_order=max_order)
    order = rolling_cv(series, config.candidates, _forecast_one(spec, settings), config.kappa,
                       prepare=_prepare_window(spec, h, settings, prepare_kwargs))
    _logger.info(f"Selected {model} order {order}")
    return order


@dataclass
class EvalReport:
    """ Mean geodesic forecast error per model and horizon, horizon m at index m - 1. """
    errors: dict
    replicates: int = 1
    config: dict = field(default_factory=dict)

    @property
    def horizons(self):
        return list(range(1, len(next(iter(self.errors.values()))) + 1))

    def to_frame(self):
        frame = pd.DataFrame({model: list(errors) for model, errors in self.errors.items()})
        frame.insert(0, 'horizon', self.horizons)
        return frame

    def to_dict(self):
        return {'errors': {model: [float(error) for error in errors] for model, errors in self.errors.items()},
                'horizons': self.horizons, 'replicates': self.replicates, 'config': self.config}


def _fit_and_forecast(series, model, m, h, order, kappa, max_order, settings, prepare_kwargs):
    spec = model_pool[model]
    if spec.uses_bandwidth and h is None:
        h = select_bandwidth(series, kappa=kappa, settings=settings)
    prepare = _prepare_window(spec, h, settings, prepare_kwargs)
    if order is None:
        order = select_order(series, model, kappa=kappa, h=h, max_order=max_order, settings=settings,
                             **prepare_kwargs)
    fitted = spec.fit_prepared(prepare(series), order, settings=settings)
    return spec.forecast(fitted, m)


def evaluate_models(series: SphereSeries, kappa=None, models=MODELS, max_order=None, h=None, order=None,
                    cv_kappa=None, settings=DEFAULT_SETTINGS, **prepare_kwargs) -> EvalReport:
    """
    For every horizon m = T - floor(T kappa), ..., 1, fits each model on the floor(T kappa) points preceding the
    last m observations and scores its m-step forecasts by their mean geodesic distance to those observations.

    :param h: fixed TPSAR bandwidth, selected by cross-validation on each training window by default
    :param order: fixed AR order, selected by cross-validation up to `max_order` by default
    :param prepare_kwargs: forwarded to the decomposition, e.g. `theta_max` or a known `period`
    """
    kappa = kappa or settings.kappa
    cv_kappa = cv_kappa or settings.cv_kappa
    max_order = max_order or settings.max_order
    T = len(series)
    count = training_count(T, kappa)
    horizons = T - count
    if count < 2 or horizons < 1:
        raise ValidationError(f"kappa {kappa} leaves {count} training and {horizons} test points out of {T}")
    errors = {model: np.zeros(horizons) for model in models}
    for m in range(horizons, 0, -1):
        train = series.window(T - count - m, T - m)
        for model in models:
            forecasts = _fit_and_forecast(train, model, m, h, order, cv_kappa, max_order, settings, prepare_kwargs)
            errors[model][m - 1] = np.mean(geo_dists(forecasts, series.points[T - m:]))
    return EvalReport(errors=errors, replicates=1,
                      config={'kappa': kappa, 'cv_kappa': cv_kappa, 'max_order': max_order, 'bandwidth': h,
                              'order': order, 'models': list(models), 'T': T})


def _evaluate_replicate(sim_config, replicate, models, kappa, h, order, max_order, settings, prepare_kwargs):
    try:
        bundle = simulate(sim_config, replicate)
    except SimulationError as e:
        return replicate, None, str(e)
    report = evaluate_models(bundle.y, kappa=kappa, models=models, max_order=max_order, h=h, order=order,
                             settings=settings, **prepare_kwargs)
    return replicate, report.errors, None


def evaluate_simulation(sim_config: SimConfig, replicates, models=MODELS, kappa=None, h=None, order=None,
                        max_order=None, settings=DEFAULT_SETTINGS, n_jobs=None, **prepare_kwargs) -> EvalReport:
    """ `evaluate_models` over simulated replicates, errors averaged per horizon in replicate order. """
    results = Parallel(n_jobs=n_jobs or worker_count())(
        delayed(_evaluate_replicate)(sim_config, replicate, models, kappa, h, order, max_order, settings,
                                     prepare_kwargs)
        for replicate in tqdm(range(replicates), desc='replicates'))
    results = sorted(results, key=lambda result: result[0])
    rejected = [(replicate, reason) for replicate, errors, reason in results if errors is None]
    for replicate, reason in rejected:
        warnings.warn(f"skipping replicate {replicate}: {reason}")
    kept = [errors for _, errors, _ in results if errors is not None]
    if not kept:
        raise SimulationError(f"all {replicates} replicates were rejected")
    errors = {model: np.mean([replicate_errors[model] for replicate_errors in kept], axis=0) for model in models}
    return EvalReport(errors=errors, replicates=len(kept),
                      config={'simulation': sim_config.to_dict(), 'kappa': kappa or settings.kappa, 'bandwidth': h,
                              'order': order, 'max_order': max_order or settings.max_order,
                              'models': list(models), 'rejected': [r for r, _ in rejected]})


def imse(estimated, truth):
    return float(np.mean(geo_dists(estimated, truth) ** 2))


def _study_replicate(sim_config, replicate, h, known_period, p, theta_max, settings):
    try:
        bundle = simulate(sim_config, replicate)
    except SimulationError as e:
        return {'replicate': replicate, 'rejected': str(e)}
    period = sim_config.theta0 if known_period else None
    decomposition = decompose(bundle.y, h, period=period, theta_max=theta_max, settings=settings)
    model = tpsar_from_decomposition(decomposition, p, settings=settings)
    T = sim_config.T
    estimated_periodic = np.array([decomposition.periodic_at(t) for t in range(1, T + 1)])
    row = {
        'replicate': replicate,
        'period': decomposition.period,
        'retest_period': retest_period(decomposition, theta_max=theta_max, settings=settings),
        'imse_trend': imse(decomposition.trend.fitted(), bundle.f_path),
        'imse_periodic': imse(estimated_periodic, bundle.g_path()),
        'imse_residuals': imse(decomposition.residuals.points, bundle.R2.points),
        'degenerate': model.degenerate,
    }
    for lag, (estimate, truth) in enumerate(zip(model.coeffs.phi, sim_config.phi), start=1):
        row[f'phi{lag}'] = float(estimate)
        row[f'phi{lag}_error'] = float(estimate - truth)
    return row


def estimation_study(sim_config: SimConfig, replicates, h, known_period=False, p=None, theta_max=None,
                     settings=DEFAULT_SETTINGS, n_jobs=None):
    """
    Per-replicate estimation accuracy of the decomposition and the residual AR fit on simulated data.

    :return: (per-replicate frame, summary with median IMSEs, period recovery rates and AR bias/MSE)
    """
    p = p or len(sim_config.phi)
    rows = Parallel(n_jobs=n_jobs or worker_count())(
        delayed(_study_replicate)(sim_config, replicate, h, known_period, p, theta_max, settings)
        for replicate in tqdm(range(replicates), desc='replicates'))
    rejected = [row['replicate'] for row in rows if 'rejected' in row]
    if rejected:
        warnings.warn(f"skipping rejected replicates {rejected}")
    frame = pd.DataFrame([row for row in rows if 'rejected' not in row])
    if frame.empty:
        raise SimulationError(f"all {replicates} replicates were rejected")
    frame = frame.sort_values('replicate').reset_index(drop=True)
    summary = {
        'replicates': len(frame),
        'rejected': rejected,
        'T': sim_config.T,
        'bandwidth': h,
        'known_period': known_period,
        'period_recovery': float(np.mean(frame['period'] == sim_config.theta0)),
        'retest_period_one': float(np.mean(frame['retest_period'] == 1)),
    }
    for column in ['imse_trend', 'imse_periodic', 'imse_residuals']:
        summary[f'median_{column}'] = float(frame[column].median())
    for lag in range(1, min(p, len(sim_config.phi)) + 1):
        summary[f'phi{lag}_bias'] = float(frame[f'phi{lag}_error'].mean())
        summary[f'phi{lag}_mse'] = float((frame[f'phi{lag}_error'] ** 2).mean())
    return frame, summary
