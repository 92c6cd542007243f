"""Adaptive Dormand-Prince 5(4) integrator for small linear ODE systems.

The state may carry a batch: ``y`` has shape ``(n_components, *batch)`` and
every batch member is advanced with a common step. Error control is relative
per member (max over components), so members of very different magnitude
share one step sequence without the small ones being ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176,
                                -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)

# continuous extension (Hairer / Shampine), rows = stages, columns = theta^1..theta^4
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


class IntegrationError(RuntimeError):
    """Raised when the step size collapses, typically at a singular point."""

    def __init__(self, message: str, radius: float):
        super().__init__(f"{message} (at r = {radius:.12g})")
        self.radius = radius


@dataclass
class OdeSystem:
    """First-order system ``y' = rhs(r, y)``."""

    rhs: Callable[[float, np.ndarray], np.ndarray]
    dimension: int
    stiffness_hint: float = 1.0


@dataclass
class OdeResult:
    y: np.ndarray
    r_end: float
    n_steps: int
    n_rejected: int
    trace_r: np.ndarray | None = None
    trace_y: np.ndarray | None = None
    r_eval: np.ndarray | None = None
    y_eval: np.ndarray | None = None


def _error_ratio(err, y_old, y_new, rtol, atol):
    scale = np.maximum(np.abs(y_old), np.abs(y_new))
    if scale.ndim > 1:
        scale = scale.max(axis=0)
        e = np.abs(err).max(axis=0)
    else:
        scale = scale.max()
        e = np.abs(err).max()
    return float(np.max(e / (atol + rtol * scale)))


def _initial_step(rhs, r0, y0, f0, direction, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    f1 = rhs(r0 + direction * h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate(system, r_start: float, r_end: float, initial_state,
              tol: float = 1e-10, atol: float = 1e-300,
              r_eval=None, trace: bool = False, first_step: float | None = None,
              max_steps: int = 500_000) -> OdeResult:
    """Integrate ``system`` from ``r_start`` to ``r_end``.

    ``system`` is an :class:`OdeSystem` or a bare callable ``rhs(r, y)``.
    Local error per accepted step is kept below ``tol`` relative to the
    state magnitude of each batch member. ``r_eval`` (monotone in the
    direction of integration) requests dense-output samples; ``trace=True``
    records the accepted step points.
    """
    rhs = system.rhs if isinstance(system, OdeSystem) else system
    if r_start == r_end:
        raise ValueError("r_start and r_end must differ")
    if tol <= 0:
        raise ValueError("tol must be positive")

    direction = 1.0 if r_end > r_start else -1.0
    span = abs(r_end - r_start)
    r = float(r_start)
    y = np.asarray(initial_state, dtype=complex).copy()
    f = rhs(r, y)

    if r_eval is not None:
        r_eval = np.asarray(r_eval, dtype=float)
        y_eval = np.empty((len(r_eval),) + y.shape, dtype=complex)
        key = direction * r_eval
        if np.any(np.diff(key) < 0):
            raise ValueError("r_eval must be ordered along the integration direction")
        eval_pos = 0
        # points coinciding with the start
        while eval_pos < len(r_eval) and direction * (r_eval[eval_pos] - r) <= 0:
            y_eval[eval_pos] = y
            eval_pos += 1
    tr_r, tr_y = ([r], [y.copy()]) if trace else (None, None)

    h = first_step if first_step else _initial_step(rhs, r, y, f, direction,
                                                   tol, max(atol, 1e-12), span)
    n_steps = n_rejected = 0
    while direction * (r_end - r) > 0:
        if n_steps + n_rejected > max_steps:
            raise IntegrationError("step budget exhausted", r)
        h_min = 1e-13 * max(abs(r), 1e-3)
        if h < h_min:
            raise IntegrationError("step size underflow", r)
        last = h >= direction * (r_end - r)
        if last:
            h = direction * (r_end - r)
        s = direction * h

        k1 = f
        k2 = rhs(r + _C[1] * s, y + s * (_A21 * k1))
        k3 = rhs(r + _C[2] * s, y + s * (_A31 * k1 + _A32 * k2))
        k4 = rhs(r + _C[3] * s, y + s * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = rhs(r + _C[4] * s, y + s * (_A51 * k1 + _A52 * k2 + _A53 * k3
                                        + _A54 * k4))
        k6 = rhs(r + s, y + s * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4
                                 + _A65 * k5))
        y_new = y + s * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        r_new = r_end if last else r + s
        k7 = rhs(r_new, y_new)
        err = s * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6
                   + _E7 * k7)
        ratio = _error_ratio(err, y, y_new, tol, atol)
        if not np.isfinite(ratio):
            h *= _MIN_FACTOR
            n_rejected += 1
            continue

        if ratio <= 1.0:
            if r_eval is not None and eval_pos < len(r_eval):
                stop = eval_pos
                while stop < len(r_eval) and direction * (r_eval[stop] - r_new) <= 0:
                    stop += 1
                if stop > eval_pos:
                    theta = (r_eval[eval_pos:stop] - r) / s
                    powers = np.cumprod(np.repeat(theta[:, None], 4, axis=1), axis=1)
                    weights = powers @ _P.T  # (n_theta, 7)
                    ks = np.stack([k1, k2, k3, k4, k5, k6, k7])
                    y_eval[eval_pos:stop] = y + s * np.tensordot(weights, ks, axes=1)
                    eval_pos = stop
            r, y, f = r_new, y_new, k7
            n_steps += 1
            if trace:
                tr_r.append(r)
                tr_y.append(y.copy())
            factor = _MAX_FACTOR if ratio == 0 else min(
                _MAX_FACTOR, _SAFETY * ratio ** -0.2)
            h = h * factor
        else:
            n_rejected += 1
            h = h * max(_MIN_FACTOR, _SAFETY * ratio ** -0.2)

    out = OdeResult(y=y, r_end=r, n_steps=n_steps, n_rejected=n_rejected)
    if trace:
        out.trace_r = np.asarray(tr_r)
        out.trace_y = np.stack(tr_y)
    if r_eval is not None:
        while eval_pos < len(r_eval):
            y_eval[eval_pos] = y
            eval_pos += 1
        out.r_eval = r_eval
        out.y_eval = y_eval
    return out
