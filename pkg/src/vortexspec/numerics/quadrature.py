"""Weighted quadrature of sampled functions."""
from __future__ import annotations

import numpy as np
from scipy.integrate import simpson


def quad_weighted(values, grid, weight="1"):
    """Composite Simpson integral of ``values * weight`` over ``grid``.

    ``weight`` is ``"1"``, ``"r"`` or an array matching the grid. Works on
    non-uniform grids and complex values.
    """
    x = np.asarray(grid, dtype=float)
    y = np.asarray(values)
    if x.ndim != 1 or len(x) < 3:
        raise ValueError("quadrature needs a one-dimensional grid with at least 3 points")
    if y.shape[-1] != len(x):
        raise ValueError("values and grid lengths differ")
    if isinstance(weight, str):
        if weight == "1":
            w = 1.0
        elif weight == "r":
            w = x
        else:
            raise ValueError(f"unknown weight {weight!r}")
    else:
        w = np.asarray(weight)
    return simpson(y * w, x=x)
