"""Lower convex envelope of a sampled function of one variable."""
from __future__ import annotations

import numpy as np


def lower_hull(x, y, keep_collinear: bool = True) -> np.ndarray:
    """Indices of the lower convex hull of the points ``(x, y)``, left to right.

    ``x`` must be strictly increasing.  Andrew's monotone chain, lower half
    only.  With ``keep_collinear`` points lying exactly on a hull segment
    are kept, so every sample on the envelope is reported.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if np.any(np.diff(x) <= 0):
        raise ValueError("x must be strictly increasing")
    scale = 1.0 + float(np.abs(y).max()) if len(y) else 1.0
    tol = 1e-13 * scale
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o])
            if cross < -tol or (cross <= tol and not keep_collinear):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull, dtype=int)


def envelope_values(x, y, at=None) -> np.ndarray:
    """Envelope evaluated at ``at`` (default: the sample abscissae)."""
    x = np.asarray(x, dtype=float)
    h = lower_hull(x, y)
    at = x if at is None else np.asarray(at, dtype=float)
    return np.interp(at, x[h], np.asarray(y, dtype=float)[h])


def chord_value(xa: float, ya: float, xb: float, yb: float, at: float) -> float:
    if xb == xa:
        return ya
    return ya + (yb - ya) * (at - xa) / (xb - xa)
