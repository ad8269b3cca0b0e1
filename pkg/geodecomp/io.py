"""
CSV series files, JSON documents and model snapshots.

Series files have a header `t,c1..cG` (sphere coordinates or compositions) or `t,bin1..binG` (histogram counts),
one row per time point.
"""
import json
import logging
import os

import numpy as np
import pandas as pd

from geodecomp.config import DEFAULT_SETTINGS
from geodecomp.embeddings import compositions_to_series, histograms_to_series
from geodecomp.errors import ValidationError
from geodecomp.models.autoregression import ARCoefficients, log_series, increment_log_series
from geodecomp.models.baselines import FittedBaseline
from geodecomp.models.tpsar import FittedTPSAR
from geodecomp.sphere import AmbientSpace, SphereSeries, UNIT_TOLERANCE
from geodecomp.stpd import SeriesDecomposition
from geodecomp.stpd.trend import TrendFit

_logger = logging.getLogger(__name__)

SERIES_KINDS = ('sphere', 'composition', 'histogram')
_COLUMN_PREFIX = {'sphere': 'c', 'composition': 'c', 'histogram': 'bin'}


def _read_table(path, prefix):
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ValidationError(f"cannot parse {path}: {e}") from e
    columns = list(frame.columns)
    expected = ['t'] + [f'{prefix}{index}' for index in range(1, len(columns))]
    if columns != expected or len(columns) < 3:
        raise ValidationError(f"{path}: expected header t,{prefix}1..{prefix}G with G >= 2, got {','.join(columns)}")
    values = frame.apply(pd.to_numeric, errors='coerce')
    malformed = np.flatnonzero(values.isna().any(axis=1).to_numpy())
    if len(malformed) > 0:
        raise ValidationError(f"{path}: row {malformed[0] + 1} is malformed")
    if len(values) < 2:
        raise ValidationError(f"{path}: series needs at least 2 rows, got {len(values)}")
    return values[columns[1:]].to_numpy(dtype=float)


def load_series(path, kind='sphere', bin_edges=None, smoothing=None) -> SphereSeries:
    """
    Reads a series file and embeds it into the sphere.

    :param kind: one of `sphere`, `composition` or `histogram`
    :param bin_edges: histogram bin edges, equal-width bins on [0, 1] by default
    :param smoothing: optional share added to every composition part before the square root
    """
    if kind not in SERIES_KINDS:
        raise ValidationError(f"unknown series kind {kind!r}, expected one of {SERIES_KINDS}")
    values = _read_table(path, _COLUMN_PREFIX[kind])
    if kind == 'composition':
        series = compositions_to_series(values, smoothing=smoothing)
    elif kind == 'histogram':
        bin_edges = np.linspace(0, 1, values.shape[1] + 1) if bin_edges is None else np.asarray(bin_edges)
        series = histograms_to_series(values, bin_edges)
    else:
        norms = np.linalg.norm(values, axis=1)
        off_sphere = np.flatnonzero(np.abs(norms - 1) > UNIT_TOLERANCE)
        if len(off_sphere) > 0:
            raise ValidationError(f"{path}: row {off_sphere[0] + 1} is not on the unit sphere "
                                  f"(norm {norms[off_sphere[0]]:.6g})")
        series = SphereSeries(values)
    _logger.debug(f"Loaded {kind} series of length {len(series)} and dimension {series.dim} from {path}")
    return series


def _ensure_parent(path):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)


def write_frame(path, frame, digits=DEFAULT_SETTINGS.csv_digits):
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=f'%.{digits}g', lineterminator='\n', encoding='utf-8')


def series_frame(points, prefix='c', start=1):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    frame = pd.DataFrame(points, columns=[f'{prefix}{index}' for index in range(1, points.shape[1] + 1)])
    frame.insert(0, 't', np.arange(start, start + len(points)))
    return frame


def write_series(path, points, prefix='c', start=1, digits=DEFAULT_SETTINGS.csv_digits):
    if isinstance(points, SphereSeries):
        points = points.points
    write_frame(path, series_frame(points, prefix=prefix, start=start), digits=digits)


def write_json(path, document):
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as json_file:
        json.dump(document, json_file, indent=2, sort_keys=True)
        json_file.write('\n')


def read_json(path):
    try:
        with open(path, encoding='utf-8') as json_file:
            return json.load(json_file)
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}") from e


def _tolist(array):
    return np.asarray(array, dtype=float).tolist()


def decomposition_to_dict(decomposition: SeriesDecomposition):
    return {
        'bandwidth': decomposition.trend.bandwidth,
        'kernel': decomposition.trend.kernel,
        'period': decomposition.period,
        'lambda_hat': decomposition.lambda_hat,
        'ic_floored': decomposition.ic_floored,
        'mu_Y': _tolist(decomposition.mu_Y),
        'mu_R1': _tolist(decomposition.mu_R1),
        'mu_R2': _tolist(decomposition.mu_R2),
        'cycle': _tolist(decomposition.cycle),
        'trend': _tolist(decomposition.trend.fitted()),
        'residuals': _tolist(decomposition.residuals.points),
        'rss_curve': [[theta, value] for theta, value in decomposition.rss_curve.items()],
        'ic_curve': [[lam, value] for lam, value in decomposition.ic_curve.items()],
    }


def write_decomposition_curves(directory, decomposition: SeriesDecomposition, digits=DEFAULT_SETTINGS.csv_digits):
    """ Plot-ready CSV files of the components and the period-selection curves. """
    write_series(os.path.join(directory, 'trend.csv'), decomposition.trend.fitted(), digits=digits)
    write_series(os.path.join(directory, 'cycle.csv'), decomposition.cycle, digits=digits)
    write_series(os.path.join(directory, 'detrended.csv'), decomposition.detrended, digits=digits)
    write_series(os.path.join(directory, 'residuals.csv'), decomposition.residuals, digits=digits)
    write_frame(os.path.join(directory, 'rss_curve.csv'),
                pd.DataFrame(list(decomposition.rss_curve.items()), columns=['theta', 'rss']), digits=digits)
    write_frame(os.path.join(directory, 'ic_curve.csv'),
                pd.DataFrame(list(decomposition.ic_curve.items()), columns=['lambda', 'ic']), digits=digits)


def model_to_dict(model):
    document = {
        'model': model.identifier,
        'series': _tolist(model.series.points),
        'ambient': model.series.ambient.to_dict(),
        'phi': _tolist(model.coeffs.phi),
        'autocov': _tolist(model.autocov),
        'degenerate': bool(model.degenerate),
    }
    if isinstance(model, FittedTPSAR):
        decomposition = model.decomposition
        document.update({
            'bandwidth': decomposition.trend.bandwidth,
            'kernel': decomposition.trend.kernel,
            'period': decomposition.period,
            'lambda_hat': decomposition.lambda_hat,
            'cycle': _tolist(decomposition.cycle),
            'mu_Y': _tolist(decomposition.mu_Y),
            'mu_R1': _tolist(decomposition.mu_R1),
            'mu_R2': _tolist(decomposition.mu_R2),
            'detrended': _tolist(decomposition.detrended.points),
            'residuals': _tolist(decomposition.residuals.points),
        })
    else:
        document['base'] = _tolist(model.logseries.base)
    return document


def model_from_dict(document, settings=DEFAULT_SETTINGS):
    """ Rebuilds a fitted model from its snapshot without refitting; the trend is re-evaluated lazily. """
    try:
        identifier = document['model']
        ambient = AmbientSpace.from_dict(document['ambient'])
        series = SphereSeries(document['series'], ambient=ambient)
        coeffs = ARCoefficients(document['phi'])
        autocov = np.asarray(document['autocov'], dtype=float)
        degenerate = bool(document['degenerate'])
        if identifier == 'TPSAR':
            trend = TrendFit(series=series, bandwidth=document['bandwidth'], kernel=document['kernel'],
                             **settings.solver)
            decomposition = SeriesDecomposition(
                trend=trend, mu_Y=np.asarray(document['mu_Y']), mu_R1=np.asarray(document['mu_R1']),
                mu_R2=np.asarray(document['mu_R2']), period=int(document['period']),
                cycle=np.asarray(document['cycle']), detrended=series.with_points(document['detrended']),
                residuals=series.with_points(document['residuals']), lambda_hat=document.get('lambda_hat'))
            return FittedTPSAR(decomposition=decomposition, logseries=log_series(decomposition.residuals,
                                                                                 decomposition.mu_R2),
                               coeffs=coeffs, autocov=autocov, degenerate=degenerate)
        if identifier == 'SAR':
            ls = log_series(series, np.asarray(document['base']))
        elif identifier == 'DSAR':
            ls = increment_log_series(series)
        else:
            raise ValidationError(f"unknown model {identifier!r} in snapshot")
        return FittedBaseline(identifier=identifier, series=series, logseries=ls, coeffs=coeffs, autocov=autocov,
                              degenerate=degenerate)
    except KeyError as e:
        raise ValidationError(f"model snapshot is missing {e}") from e


def save_model(path, model):
    write_json(path, model_to_dict(model))


def load_model(path, settings=DEFAULT_SETTINGS):
    return model_from_dict(read_json(path), settings=settings)
