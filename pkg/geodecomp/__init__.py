import logging

from geodecomp.config import DEFAULT_SETTINGS
from geodecomp.evaluation import select_bandwidth, select_order
from geodecomp.models import model_pool

_logger = logging.getLogger(__name__)


def fit_and_forecast(series, m, model='TPSAR', h=None, order=None, settings=DEFAULT_SETTINGS, **prepare_kwargs):
    """ Fits `model` on the whole series, choosing missing bandwidth and order by rolling cross-validation. """
    spec = model_pool[model]
    if spec.uses_bandwidth and h is None:
        h = select_bandwidth(series, settings=settings)
    if order is None:
        order = select_order(series, model, h=h, settings=settings, **prepare_kwargs)
    _logger.debug(f"Forecasting {m} steps with {model}({order})")
    return spec.forecast(spec.fit(series, order, h=h, settings=settings, **prepare_kwargs), m)
