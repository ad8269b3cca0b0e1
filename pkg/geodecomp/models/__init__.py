from typing import NamedTuple, Callable

from geodecomp.config import DEFAULT_SETTINGS
from geodecomp.errors import ValidationError
from geodecomp.models.autoregression import max_order
from geodecomp.models.baselines import fit_sar, fit_dsar, forecast_sar, forecast_dsar
from geodecomp.models.tpsar import tpsar_from_decomposition, forecast_tpsar
from geodecomp.stpd import decompose


class ModelSpec(NamedTuple):
    """
    Fitting and forecasting entry points of a model.
    `prepare` holds the order-independent work so that several AR orders can share it.
    """
    identifier: str
    prepare: Callable
    fit_prepared: Callable
    forecast: Callable
    max_order: Callable
    uses_bandwidth: bool = False

    def fit(self, series, p, h=None, settings=DEFAULT_SETTINGS, **kwargs):
        return self.fit_prepared(self.prepare(series, h, settings=settings, **kwargs), p, settings=settings)


def _decompose(series, h, settings=DEFAULT_SETTINGS, **kwargs):
    if h is None:
        raise ValidationError("TPSAR needs a trend bandwidth")
    return decompose(series, h, settings=settings, **kwargs)


def _as_is(series, h=None, settings=DEFAULT_SETTINGS, **kwargs):
    return series


class ModelPool(dict):
    """
    Provides the forecasting models.
    Each entry maps from identifier to a `ModelSpec`.
    """

    def __init__(self):
        super(ModelPool, self).__init__()
        _key_functions = {
            'TPSAR': lambda: ModelSpec('TPSAR', prepare=_decompose, fit_prepared=tpsar_from_decomposition,
                                       forecast=forecast_tpsar, max_order=max_order, uses_bandwidth=True),
            'SAR': lambda: ModelSpec('SAR', prepare=_as_is, fit_prepared=fit_sar, forecast=forecast_sar,
                                     max_order=max_order),
            'DSAR': lambda: ModelSpec('DSAR', prepare=_as_is, fit_prepared=fit_dsar, forecast=forecast_dsar,
                                      max_order=lambda length: max_order(length - 1)),
        }
        for identifier, function in _key_functions.items():
            self[identifier] = function()

    def __missing__(self, identifier):
        raise ValidationError(f"unknown model {identifier!r}, expected one of {list(self)}")


model_pool = ModelPool()
