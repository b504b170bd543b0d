import dataclasses
import enum
import json
import math

import numpy as np


def _finite_or_none(value: float):
    return value if math.isfinite(value) else None


def sanitize(o):
    """Replace non-finite floats by None, recursing into containers and arrays."""
    if isinstance(o, float):
        return _finite_or_none(o)
    if isinstance(o, np.floating):
        return _finite_or_none(float(o))
    if isinstance(o, np.ndarray):
        return sanitize(o.tolist())
    if isinstance(o, dict):
        return {key: sanitize(value) for key, value in o.items()}
    if isinstance(o, (list, tuple)):
        return [sanitize(value) for value in o]
    return o


class CustomJsonEncoder(json.JSONEncoder):
    """Helper class to convert JSON documents with numpy values, dataclasses, or enums."""

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return _finite_or_none(float(o))
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return sanitize(o.tolist())
        if isinstance(o, enum.Enum):
            return o.value
        if dataclasses.is_dataclass(o) and not isinstance(o, type):
            return sanitize(dataclasses.asdict(o))
        try:
            return super(CustomJsonEncoder, self).default(o)
        except Exception:
            return None


def dumps(document, **kwargs) -> str:
    """JSON with NaN and infinities written as null"""
    return json.dumps(sanitize(document), cls=CustomJsonEncoder, allow_nan=False, **kwargs)
