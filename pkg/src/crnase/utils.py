import math
from typing import Optional, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


def db_to_linear(value_db: float) -> float:
    if math.isinf(value_db):
        return math.inf if value_db > 0 else 0.0
    return 10.0 ** (value_db / 10.0)


def as_output(value: np.ndarray) -> ArrayLike:
    """Return plain floats for 0-d results so scalar callers get scalars back."""
    if np.ndim(value) == 0:
        return float(value)
    return value


def format_number(value: Optional[float]) -> str:
    """Shortest decimal that round-trips to the same double; empty when absent."""
    if value is None:
        return ""
    return repr(float(value))
