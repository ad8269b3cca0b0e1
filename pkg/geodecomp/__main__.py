import logging
import os
import sys

import argparse
import fire

from geodecomp.config import load_settings, home_directory
from geodecomp.embeddings import points_to_data
from geodecomp.errors import ValidationError, NumericalError
from geodecomp.evaluation import MODELS, select_bandwidth, select_order, evaluate_models, evaluate_simulation, \
    estimation_study
from geodecomp.io import load_series, write_series, write_json, read_json, write_frame, decomposition_to_dict, \
    write_decomposition_curves, save_model, load_model
from geodecomp.models import model_pool
from geodecomp.simulation import SimConfig, simulate, truth_dict
from geodecomp.stpd import decompose

_logger = logging.getLogger(__name__)


def _configure_logging(log_level):
    logging.basicConfig(stream=sys.stdout, level=logging.getLevelName(log_level),
                        format='%(asctime)-15s %(levelname)s:%(name)s:%(message)s')
    logging.getLogger('joblib').setLevel(logging.WARNING)


def _sim_config(path, seed, **overrides):
    values = read_json(path) if path else {}
    values.update({key: value for key, value in overrides.items() if value is not None})
    if seed is not None:
        values['seed'] = seed
    try:
        return SimConfig.from_dict(values)
    except TypeError as e:
        raise ValidationError(f"invalid simulation settings: {e}") from e


def _model_list(models):
    if isinstance(models, str):
        models = models.split(',')
    models = [model.strip() for model in models]
    for model in models:
        model_pool[model]
    return models


def _output(path, command):
    return path or os.path.join(home_directory(), command)


class Commands:
    """ Sphere-valued time series decomposition and forecasting. """

    def __init__(self, settings):
        self._settings = settings

    def simulate(self, simulation=None, output=None, seed=None, replicate=0, T=None):
        """
        Writes a simulated series (series.csv) with its true components (truth.json).

        :param simulation: JSON file with simulation settings
        """
        config = _sim_config(simulation, seed, T=T)
        bundle = simulate(config, replicate=replicate)
        output = _output(output, 'simulate')
        write_series(os.path.join(output, 'series.csv'), bundle.y, digits=self._settings.csv_digits)
        write_json(os.path.join(output, 'truth.json'), truth_dict(bundle))
        _logger.info(f"Wrote simulated series of length {config.T} to {output}")

    def decompose(self, series, output=None, kind='sphere', bandwidth=None, period=None, theta_max=None,
                  kernel=None):
        """ Decomposes a series file into trend, periodic component and residuals. """
        data = load_series(series, kind=kind)
        bandwidth = bandwidth or select_bandwidth(data, kernel=kernel, settings=self._settings)
        decomposition = decompose(data, bandwidth, period=period, theta_max=theta_max, kernel=kernel,
                                  settings=self._settings)
        output = _output(output, 'decompose')
        write_json(os.path.join(output, 'decomposition.json'), decomposition_to_dict(decomposition))
        write_decomposition_curves(output, decomposition, digits=self._settings.csv_digits)
        _logger.info(f"Decomposition with period {decomposition.period} written to {output}")

    def fit(self, series, output=None, model='TPSAR', kind='sphere', bandwidth=None, order=None, period=None,
            theta_max=None):
        """ Fits a model and writes its JSON snapshot. """
        data = load_series(series, kind=kind)
        spec = model_pool[model]
        if spec.uses_bandwidth:
            bandwidth = bandwidth or select_bandwidth(data, settings=self._settings)
        prepare_kwargs = {'period': period, 'theta_max': theta_max} if spec.uses_bandwidth else {}
        order = order or select_order(data, model, h=bandwidth, settings=self._settings, **prepare_kwargs)
        fitted = spec.fit(data, order, h=bandwidth, settings=self._settings, **prepare_kwargs)
        output = output or os.path.join(home_directory(), 'fit', f'{model}.json')
        save_model(output, fitted)
        _logger.info(f"{model}({order}) snapshot written to {output}")

    def forecast(self, model, horizon, output=None, data_space=False):
        """
        Writes m-step forecasts of a model snapshot.

        :param data_space: also write the forecasts mapped back to compositions or densities
        """
        fitted = load_model(model, settings=self._settings)
        forecasts = model_pool[fitted.identifier].forecast(fitted, int(horizon))
        output = output or os.path.join(home_directory(), 'forecast', 'forecast.csv')
        start = len(fitted.series) + 1
        write_series(output, forecasts, start=start, digits=self._settings.csv_digits)
        if data_space:
            mapped = points_to_data(forecasts, fitted.series.ambient)
            prefix = 'bin' if fitted.series.ambient.kind == 'density' else 'c'
            write_series(os.path.splitext(output)[0] + '_data.csv', mapped, prefix=prefix, start=start,
                         digits=self._settings.csv_digits)
        _logger.info(f"{len(forecasts)} forecasts written to {output}")

    def evaluate(self, series=None, output=None, kind='sphere', simulation=None, replicates=1, seed=None,
                 models=','.join(MODELS), kappa=None, bandwidth=None, order=None, max_order=None, theta_max=None,
                 period=None):
        """ Multi-horizon forecast errors of a series file, or averaged over simulated replicates. """
        models = _model_list(models)
        prepare_kwargs = {key: value for key, value in {'theta_max': theta_max, 'period': period}.items()
                          if value is not None}
        if series is not None:
            report = evaluate_models(load_series(series, kind=kind), kappa=kappa, models=models,
                                     max_order=max_order, h=bandwidth, order=order, settings=self._settings,
                                     **prepare_kwargs)
        else:
            report = evaluate_simulation(_sim_config(simulation, seed), replicates, models=models, kappa=kappa,
                                         h=bandwidth, order=order, max_order=max_order, settings=self._settings,
                                         **prepare_kwargs)
        output = _output(output, 'evaluate')
        write_json(os.path.join(output, 'report.json'), report.to_dict())
        write_frame(os.path.join(output, 'errors.csv'), report.to_frame(), digits=self._settings.csv_digits)
        _logger.info(f"Evaluation report over {report.replicates} replicate(s) written to {output}")

    def study(self, output=None, simulation=None, replicates=20, seed=None, bandwidth=0.5, known_period=False,
              order=None, theta_max=None):
        """ Estimation accuracy of the decomposition and the AR fit over simulated replicates. """
        frame, summary = estimation_study(_sim_config(simulation, seed), replicates, bandwidth,
                                          known_period=known_period, p=order, theta_max=theta_max,
                                          settings=self._settings)
        output = _output(output, 'study')
        write_frame(os.path.join(output, 'study.csv'), frame, digits=self._settings.csv_digits)
        write_json(os.path.join(output, 'summary.json'), summary)
        _logger.info(f"Study over {summary['replicates']} replicates written to {output}")


def run_cli(argv=None):
    """
    Runs a command line and returns its exit status:
    0 on success, 1 on invalid input or usage, 2 on numerical failure.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--log_level', type=str, default='INFO')
    parser.add_argument('--config', type=str, default=None, help="JSON file overriding default settings")
    args, remaining_args = parser.parse_known_args(argv)
    _configure_logging(args.log_level)
    _logger.info(f"Running {' '.join(argv)}")
    try:
        settings = load_settings(args.config)
        fire.Fire(Commands(settings), command=remaining_args, name='geodecomp')
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2
    except fire.core.FireExit as e:
        # usage errors share the status of invalid input
        return 0 if e.code == 0 else 1
    return 0


def main():
    sys.exit(run_cli())


if __name__ == '__main__':
    main()
