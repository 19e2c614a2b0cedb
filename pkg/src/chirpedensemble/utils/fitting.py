import logging
from typing import NamedTuple, Sequence

import numpy as np

from chirpedensemble.exceptions import ArgumentError

logger = logging.getLogger(__name__)


class LogLogFit(NamedTuple):
    slope: float
    intercept: float
    residual: float  # RMS residual in log space


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> LogLogFit:
    """Ordinary least squares of log(y) against log(x)."""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    if x_arr.shape != y_arr.shape or x_arr.size < 2:
        raise ArgumentError(f"Need two equally long sequences of >= 2 points, got {x_arr.shape}, {y_arr.shape}.")
    if np.any(x_arr <= 0) or np.any(y_arr <= 0):
        raise ArgumentError("Log-log fit needs strictly positive data.")
    log_x, log_y = np.log(x_arr), np.log(y_arr)
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residual = float(np.sqrt(np.mean((log_y - (slope * log_x + intercept)) ** 2)))
    logger.debug(f"Log-log fit over {x_arr.size} points: slope {slope:.4f}, RMS residual {residual:.2e}.")
    return LogLogFit(float(slope), float(intercept), residual)


def is_geometric(values: Sequence[float], rtol: float = 1e-6) -> bool:
    """True when consecutive ratios agree within rtol."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 3:
        return True
    ratios = arr[1:] / arr[:-1]
    return bool(np.allclose(ratios, ratios[0], rtol=rtol))
