"""
Run configuration.

Values are layered: built-in defaults, then a ``--config`` JSON file, then
the ``HOLONOMY_PRECISION`` environment variable (precision only), then
explicit command-line flags.
"""

import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from dynamics.errors import ConfigurationError
from utils.helpers import load_json
from utils.parallel import default_workers

PRECISION_ENV = "HOLONOMY_PRECISION"

DEFAULT_PRECISION = 256
HIGH_PRECISION = 512
HIGH_PRECISION_COMMANDS = ("cycles", "orbit")


@dataclass(frozen=True)
class RunConfig:
    command: str = "classify"
    truncation: int = 64
    precision: Optional[int] = None
    field: str = "auto"
    grid: int = 512
    max_iter: int = 10 ** 4
    radius: float = 1.0
    zero_threshold: float = 1e-30
    commutator_tolerance: float = 1e-20
    workers: int = 0
    seed: Optional[int] = None
    output: Optional[str] = None

    def __post_init__(self):
        if not 8 <= self.truncation <= 512:
            raise ConfigurationError(f"truncation must lie in 8..512, got {self.truncation}")
        if self.precision is not None and self.precision < 53:
            raise ConfigurationError(f"precision must be at least 53 bits, got {self.precision}")
        if not 3 <= self.grid <= 4096:
            raise ConfigurationError(f"grid must lie in 3..4096, got {self.grid}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be positive, got {self.max_iter}")
        if not self.radius > 0:
            raise ConfigurationError(f"radius must be positive, got {self.radius}")
        if self.zero_threshold < 0 or self.commutator_tolerance < 0:
            raise ConfigurationError("tolerances must be nonnegative")
        if self.workers < 0:
            raise ConfigurationError(f"workers must be nonnegative (0 uses every core), got {self.workers}")
        if self.field not in ("auto", "exact", "float"):
            raise ConfigurationError(f"field must be auto, exact or float, got {self.field!r}")

    @property
    def bits(self):
        """Working precision, defaulting by command."""
        if self.precision is not None:
            return self.precision
        return HIGH_PRECISION if self.command in HIGH_PRECISION_COMMANDS else DEFAULT_PRECISION

    @property
    def worker_count(self):
        return self.workers or default_workers()

    def to_json(self):
        data = asdict(self)
        data["precision"] = self.bits
        data.pop("workers")
        return data


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def _coerce(name, value):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    try:
        if name in ("truncation", "grid", "max_iter", "workers"):
            return int(float(value)) if isinstance(value, str) else int(value)
        if name in ("radius", "zero_threshold", "commutator_tolerance"):
            return float(value)
        if name in ("precision", "seed"):
            return None if value is None else int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad value for {name}: {value!r} ({kind})") from exc
    return value


def load_config(command, file_path=None, overrides=None, environ=None):
    """
    Resolve a RunConfig.

    Args:
        command: Subcommand name
        file_path: Optional JSON file with RunConfig keys
        overrides: Flag values; None entries are ignored
        environ: Environment mapping, os.environ by default

    Returns:
        RunConfig
    """
    values = {}
    if file_path:
        try:
            data = load_json(file_path)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read config {file_path}: {exc}") from exc
        unknown = set(data) - _FIELD_NAMES
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update({k: _coerce(k, v) for k, v in data.items()})

    environ = os.environ if environ is None else environ
    if environ.get(PRECISION_ENV):
        values["precision"] = _coerce("precision", environ[PRECISION_ENV])

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value)
    values["command"] = command
    return replace(RunConfig(command=command), **values)
