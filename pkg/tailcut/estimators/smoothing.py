import math

import numpy as np
from scipy.ndimage import correlate1d

MIN_SPAN = 15


def default_span(grid_size: int) -> int:
    return max(MIN_SPAN, math.ceil(0.1 * grid_size))


def tricube(u: np.ndarray) -> np.ndarray:
    u = np.abs(np.asarray(u, dtype=float))
    return np.where(u < 1, (1 - u**3) ** 3, 0.0)


def local_linear(x: np.ndarray, y: np.ndarray, span: int) -> np.ndarray:
    """
    Local-linear regression of ``y`` on ``x`` evaluated at every ``x``. The kernel is a tricube
    in grid-index distance: the fit at position ``j`` uses the neighbours ``j-span..j+span``
    with weights ``tricube(d / (span + 1))``. Windows are truncated at the edges of the grid.

    :param x: strictly increasing design points
    :param y: responses aligned with ``x``
    :param span: half-width of the window in grid points (>= 1)
    :return: fitted values aligned with ``x``
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if span < 1:
        raise ValueError("span must be at least 1")

    # local-linear fits are affine-equivariant in x, so standardize for conditioning
    scale = np.ptp(x) or 1.0
    xs = (x - x.mean()) / scale

    weights = tricube(np.arange(-span, span + 1) / (span + 1))

    def _window_sum(values: np.ndarray) -> np.ndarray:
        return correlate1d(values, weights, mode="constant", cval=0.0)

    s0 = _window_sum(np.ones_like(xs))
    sx = _window_sum(xs)
    sxx = _window_sum(xs**2)
    ty = _window_sum(y)
    txy = _window_sum(xs * y)

    s1 = sx - xs * s0
    s2 = sxx - 2 * xs * sx + xs**2 * s0
    t1 = txy - xs * ty

    det = s0 * s2 - s1**2
    with np.errstate(divide="ignore", invalid="ignore"):
        fitted = (s2 * ty - s1 * t1) / det
    degenerate = np.abs(det) <= 1e-12 * np.maximum(s0 * s2, 1e-300)
    fitted[degenerate] = ty[degenerate] / s0[degenerate]
    return fitted
