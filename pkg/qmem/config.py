"""
JSON configuration records and process-level knobs.

Parameter records are frozen dataclasses. A JSON object is mapped onto one
with `load_record`, which rejects unknown keys. Fields that hold a physical
time declare ``metadata={"unit": "s"}`` and must be spelled with an explicit
unit suffix in JSON (``tau_r_us``, ``tau_c_ns``, ...); the value is converted
to seconds on load.

Example:
    >>> from dataclasses import dataclass, field
    >>> @dataclass(frozen=True)
    ... class Wait:
    ...     tau: float = field(metadata={"unit": "s"})
    ...     label: str = "w"
    >>> load_record(Wait, {"tau_ns": 50})
    Wait(tau=5e-08, label='w')
    >>> load_record(Wait, {"tau": 1.0})
    Traceback (most recent call last):
    ...
    qmem.errors.ConfigError: time field 'tau' needs a unit suffix (one of _s, _ms, _us, _ns)
"""

import dataclasses
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Type, TypeVar, Union

from qmem.errors import ConfigError

logger = logging.getLogger(__name__)

R = TypeVar("R")

#: unit suffix to the number of such units in one second
TIME_UNITS: Dict[str, float] = {"s": 1.0, "ms": 1e3, "us": 1e6, "ns": 1e9}

THREADS_ENV = "QMEM_THREADS"


def _time_key(key: str) -> Optional[tuple]:
    base, _, unit = key.rpartition("_")
    if base and unit in TIME_UNITS:
        return base, TIME_UNITS[unit]
    return None


def load_record(cls: Type[R], data: Mapping[str, Any]) -> R:
    """
    Build the dataclass `cls` from a JSON object, rejecting unknown keys.

    Missing keys fall back to the dataclass defaults; validation is left to
    the record's own ``__post_init__``.
    """
    if not isinstance(data, Mapping):
        raise ConfigError(f"expected a JSON object, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}  # type: ignore[arg-type]
    kwargs: Dict[str, Any] = {}
    for key, value in data.items():
        if key in fields and "unit" not in fields[key].metadata:
            kwargs[key] = value
            continue
        if key in fields:
            suffixes = ", ".join(f"_{u}" for u in TIME_UNITS)
            raise ConfigError(
                f"time field {key!r} needs a unit suffix (one of {suffixes})"
            )
        split = _time_key(key)
        if split is None or split[0] not in fields or "unit" not in fields[split[0]].metadata:
            raise ConfigError(f"unknown key {key!r} for {cls.__name__}")
        name, per_second = split
        if name in kwargs:
            raise ConfigError(f"time field {name!r} given twice")
        try:
            kwargs[name] = float(value) / per_second
        except (TypeError, ValueError):
            raise ConfigError(f"{key!r} must be a number, got {value!r}")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc))


def read_json(source: Union[str, Path]) -> Dict[str, Any]:
    """
    Parse `source` as inline JSON text if it looks like an object, otherwise
    as a path to a JSON file.
    """
    text = str(source)
    if not text.lstrip().startswith("{"):
        try:
            text = Path(text).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {source!r}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"expected a JSON object, got {type(data).__name__}")
    return data


def max_workers() -> int:
    """
    Cap on internal parallelism, read from ``QMEM_THREADS``.

    Example:
        >>> import os
        >>> os.environ["QMEM_THREADS"] = "3"
        >>> max_workers()
        3
        >>> del os.environ["QMEM_THREADS"]
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1, got {value}")
    logger.debug("parallelism capped at %d by %s", value, THREADS_ENV)
    return value
