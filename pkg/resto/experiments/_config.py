"""Run configuration.

Configuration files are JSON objects, nested or already flat; nested
objects are flattened to dotted keys (``{"stft": {"hop": 128}}`` becomes
``stft.hop``). Every key must be known, and values are checked against the
type of their default.

"""
import json
import os
from collections import OrderedDict

from .._constants import (
    CODEBOOK_SIZE,
    DEFAULT_SAMPLE_RATE,
    FEATURE_DIM,
    LOG_FLOOR,
    N_QUANTIZERS,
    SCALAR_LEVELS,
)
from ..exceptions import ConfigError

__all__ = ["RunConfig", "DEFAULTS", "flatten"]

# key: (default, type, nullable)
_SCHEMA = OrderedDict(
    [
        ("sample_rate", (DEFAULT_SAMPLE_RATE, int, False)),
        ("seed", (0, int, False)),
        ("stft.fft_size", (512, int, False)),
        ("stft.hop", (128, int, False)),
        ("stft.window", ("sqrt_hann", str, False)),
        ("stft.center_padding", (True, bool, False)),
        ("simulate.count", (10, int, False)),
        ("simulate.segment_seconds", (6.0, float, False)),
        ("simulate.snr_levels", (None, list, True)),
        ("simulate.snr_range", ([-6.0, 6.0], list, False)),
        ("simulate.rt60_levels", (None, list, True)),
        ("simulate.rt60_range", ([0.0, 0.6], list, False)),
        ("simulate.max_reflection_order", (30, int, False)),
        ("simulate.speech_dir", (None, str, True)),
        ("simulate.noise_dir", (None, str, True)),
        ("simulate.wav_format", ("float32", str, False)),
        ("simulate.jobs", (1, int, False)),
        ("quantizer.scheme", ("sq_rvq", str, False)),
        ("quantizer.n_q", (N_QUANTIZERS, int, False)),
        ("quantizer.N", (CODEBOOK_SIZE, int, False)),
        ("quantizer.D", (FEATURE_DIM, int, False)),
        ("quantizer.K", (SCALAR_LEVELS, int, False)),
        ("quantizer.fsq_levels", (5, int, False)),
        ("quantizer.lfq_scale", (1.0, float, False)),
        ("quantizer.group_count", (2, int, False)),
        ("quantizer.parallel_weight", (0.5, float, False)),
        ("quantizer.reserved_zero", (True, bool, False)),
        ("train.epochs", (10, int, False)),
        ("train.ema_decay", (0.99, float, False)),
        ("train.kmeans_init_iters", (20, int, False)),
        ("train.dead_code_threshold", (1e-3, float, False)),
        ("adapter.projection", ("orthonormal", str, False)),
        ("adapter.phase_source", ("from_input", str, False)),
        ("adapter.feature_domain", ("log_magnitude", str, False)),
        ("adapter.log_floor", (LOG_FLOOR, float, False)),
        ("adapter.feature_scale", (0.0625, float, False)),
        ("mask.kind", ("oracle", str, False)),
        ("mask.bound", (None, float, True)),
        ("mask.compression", ("clip", str, False)),
        ("mask.path", (None, str, True)),
        ("fusion.beta", (None, float, True)),
        ("fusion.weights_path", (None, str, True)),
        ("run.jobs", (1, int, False)),
        ("paths.manifest", (None, str, True)),
        ("paths.codebook", (None, str, True)),
        ("paths.output_dir", (None, str, True)),
    ]
)

DEFAULTS = OrderedDict((key, spec[0]) for key, spec in _SCHEMA.items())


def flatten(mapping, prefix=""):
    """Flatten nested dictionaries to dotted keys."""
    flat = OrderedDict()
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


def _check_value(key, value):
    _, expected, nullable = _SCHEMA[key]

    if value is None:
        if not nullable:
            raise ConfigError(f"{key} must not be null.")
        return None

    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean, got {value!r}.")
        return value
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a {expected.__name__}, got {value!r}.")

    if expected is int:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}.")
        return value
    if expected is float:
        if not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}.")
        return float(value)
    if expected is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}.")
        return value

    if not isinstance(value, (list, tuple)) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{key} must be a list of numbers, got {value!r}.")
    return [float(v) for v in value]


def _parse_assignment(assignment):
    if "=" not in assignment:
        raise ConfigError(f"Override {assignment!r} is not of the form key=value.")
    key, text = assignment.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key.strip(), value


class RunConfig:

    """Validated flat configuration of a run.

    Unset keys take their defaults. Keys are read with ``cfg["stft.hop"]``
    and whole sections with :meth:`section`.

    Raises
    ------
    ConfigError
        On unknown keys or values of the wrong type.

    """

    def __init__(self, values=None):
        self._values = OrderedDict(DEFAULTS)

        unknown = sorted(set(values or {}) - set(_SCHEMA))
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}.")

        for key, value in (values or {}).items():
            self._values[key] = _check_value(key, value)

        if self._values["sample_rate"] <= 0:
            raise ConfigError(f"Invalid sample rate {self._values['sample_rate']}.")
        for key in ("simulate.snr_range", "simulate.rt60_range"):
            if len(self._values[key]) != 2:
                raise ConfigError(f"{key} must have two values.")
        for key in ("simulate.jobs", "run.jobs"):
            if self._values[key] == 0:
                raise ConfigError(f"{key} must be non-zero.")

    @classmethod
    def from_file(cls, path):
        if not os.path.isfile(path):
            raise ConfigError(f"Configuration file {path} does not exist.")
        with open(path, "r") as f:
            try:
                content = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path} is not valid JSON: {e}") from e
        if not isinstance(content, dict):
            raise ConfigError(f"{path} must hold a JSON object.")
        return cls(flatten(content))

    def with_overrides(self, assignments=(), seed=None):
        """Apply ``key=value`` overrides, values parsed as JSON or kept as text."""
        values = OrderedDict(self._values)
        for assignment in assignments:
            key, value = _parse_assignment(assignment)
            values[key] = value
        if seed is not None:
            values["seed"] = seed
        return RunConfig(values)

    def require(self, *keys):
        """Raise a :class:`ConfigError` if one of `keys` is unset."""
        missing = [key for key in keys if self._values[key] is None]
        if missing:
            raise ConfigError(f"Missing configuration: {', '.join(missing)}.")

    def require_existing(self, *keys):
        """Like :meth:`require`, also checking that the paths exist."""
        self.require(*keys)
        for key in keys:
            if not os.path.exists(self._values[key]):
                raise ConfigError(f"{key} {self._values[key]} does not exist.")

    def section(self, prefix):
        start = f"{prefix}."
        return OrderedDict(
            (key[len(start) :], value)
            for key, value in self._values.items()
            if key.startswith(start)
        )

    def to_dict(self):
        return OrderedDict(self._values)

    def __getitem__(self, key):
        return self._values[key]

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self._values == other._values

    def __repr__(self):
        return f"RunConfig({json.dumps(self._values)})"
