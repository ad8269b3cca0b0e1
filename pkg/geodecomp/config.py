import json
import logging
import os
from dataclasses import dataclass, fields, replace, asdict

from geodecomp.errors import ValidationError

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    """
    Tolerances and defaults shared by the pipeline.
    Every field can be overridden from a JSON file with the same keys, see `load_settings`.
    """
    frechet_tolerance: float = 1e-9
    frechet_max_iter: int = 500
    condition_max: float = 1e12
    rss_floor: float = 1e-300
    kernel: str = 'gaussian'
    theta_max_cap: int = 40
    n_lambda: int = 50
    lambda_ratio: float = 1e-4
    n_bandwidths: int = 10
    max_bandwidth: float = 0.5
    kappa: float = 0.8
    cv_kappa: float = 0.2
    max_order: int = 20
    csv_digits: int = 12

    @property
    def solver(self):
        return {'tol': self.frechet_tolerance, 'max_iter': self.frechet_max_iter}

    def to_dict(self):
        return asdict(self)


DEFAULT_SETTINGS = Settings()


def _read_overrides(path):
    try:
        with open(path, encoding='utf-8') as config_file:
            overrides = json.load(config_file)
    except OSError as e:
        raise ValidationError(f"cannot read settings {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"settings {path} are not valid JSON: {e}") from e
    if not isinstance(overrides, dict):
        raise ValidationError(f"settings {path} must hold a JSON object, got {type(overrides).__name__}")
    return overrides


def _coerce(name, kind, value):
    """ JSON value for a setting of type `kind`; integers are accepted where floats are expected. """
    numeric = isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is float and numeric:
        return float(value)
    if kind is int and numeric and float(value).is_integer():
        return int(value)
    if kind is str and isinstance(value, str):
        return value
    raise ValidationError(f"setting {name!r} must be of type {kind.__name__}, got {value!r}")


def load_settings(path=None) -> Settings:
    if path is None:
        return DEFAULT_SETTINGS
    overrides = _read_overrides(path)
    known = {field.name: field.type for field in fields(Settings)}
    unknown = set(overrides) - set(known)
    if unknown:
        raise ValidationError(f"unknown settings in {path}: {sorted(unknown)}")
    overrides = {name: _coerce(name, known[name], value) for name, value in overrides.items()}
    _logger.debug(f"Overriding settings from {path}: {overrides}")
    return replace(DEFAULT_SETTINGS, **overrides)


def worker_count():
    threads = os.getenv('GEODECOMP_THREADS', '1')
    try:
        threads = int(threads)
    except ValueError:
        raise ValidationError(f"GEODECOMP_THREADS must be an integer, got {threads!r}")
    return max(threads, 1)


def home_directory():
    return os.path.expanduser(os.getenv('GEODECOMP_HOME', '~/.geodecomp'))
