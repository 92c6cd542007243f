"""Two-sided shooting for second-order linear eigenvalue problems.

The problem is written as a first-order system for ``y = (u, flux)`` where
the flux is the quantity whose derivative appears in the equation, e.g.
``flux = A(r) (u' + u/r)``. With that choice the Wronskian
``u_L flux_R - u_R flux_L`` is independent of r, so the mismatch at the
matching point vanishes exactly when the two shots are proportional.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ode import integrate


@dataclass
class ShootingProblem:
    """Linear system ``y' = rhs(r, y, p)`` with boundary models.

    ``left(p)`` and ``right(p)`` return the boundary states (shape
    ``(2, *batch)``) at ``r0`` and ``R``. ``jumps`` lists ``(r_b, fn)`` where
    ``fn(y, p)`` returns the flux increment across ``r_b`` (left to right).
    """

    rhs: Callable
    left: Callable
    right: Callable
    jumps: list = field(default_factory=list)


@dataclass
class Shot:
    r: np.ndarray
    y: np.ndarray  # (n_r, 2, *batch)


def _shoot(problem, p, r_from, r_to, y0, tol, r_eval=None):
    direction = 1.0 if r_to > r_from else -1.0
    cuts = sorted((rb for rb, _ in problem.jumps
                   if min(r_from, r_to) < rb < max(r_from, r_to)),
                  key=lambda rb: direction * rb)
    jump_fn = dict(problem.jumps)
    rhs = lambda r, y: problem.rhs(r, y, p)
    y = np.asarray(y0, dtype=complex)
    nodes = [r_from] + cuts + [r_to]
    samples_r, samples_y = [], []
    for i, (a, b) in enumerate(zip(nodes[:-1], nodes[1:])):
        sel = None
        if r_eval is not None:
            lo, hi = min(a, b), max(a, b)
            in_piece = (r_eval >= lo) & (r_eval <= hi)
            if i > 0:
                # the jump node belongs to the piece it was reached from
                in_piece &= direction * (r_eval - a) > 0
            sel = r_eval[in_piece]
            sel = sel[np.argsort(direction * sel)]
        res = integrate(rhs, a, b, y, tol=tol, r_eval=sel if sel is not None and len(sel) else None)
        if sel is not None and len(sel):
            samples_r.append(sel)
            samples_y.append(res.y_eval)
        y = res.y
        if b in jump_fn and b != r_to:
            dflux = jump_fn[b](y, p)
            y = y.copy()
            y[1] = y[1] + direction * dflux
    if r_eval is None:
        return y, None
    rr = np.concatenate(samples_r) if samples_r else np.empty(0)
    yy = np.concatenate(samples_y) if samples_y else np.empty((0,) + y.shape)
    return y, Shot(rr, yy)


def shoot_two_sided(problem: ShootingProblem, p, r0: float, r_mid: float, R: float,
                    tol: float = 1e-10, normalize: bool = False):
    """Wronskian mismatch ``u_L flux_R - u_R flux_L`` at ``r_mid``.

    The unnormalized mismatch is analytic in the spectral parameter. With
    ``normalize`` it is divided by the norms of the two shots, which keeps
    the zero set and the phase but not analyticity.
    """
    yl, _ = _shoot(problem, p, r0, r_mid, problem.left(p), tol)
    yr, _ = _shoot(problem, p, R, r_mid, problem.right(p), tol)
    miss = yl[0] * yr[1] - yr[0] * yl[1]
    if normalize:
        miss = miss / (np.sqrt(np.abs(yl[0]) ** 2 + np.abs(yl[1]) ** 2)
                       * np.sqrt(np.abs(yr[0]) ** 2 + np.abs(yr[1]) ** 2))
    return miss


def shoot_profiles(problem: ShootingProblem, p, r0, r_mid, R, grid, tol=1e-10):
    """Left and right shots sampled on ``grid`` (split at ``r_mid``)."""
    grid = np.asarray(grid, dtype=float)
    left_grid = grid[grid <= r_mid]
    right_grid = grid[grid > r_mid]
    yl, shot_l = _shoot(problem, p, r0, r_mid, problem.left(p), tol, r_eval=left_grid)
    yr, shot_r = _shoot(problem, p, R, r_mid, problem.right(p), tol, r_eval=right_grid)
    return yl, shot_l, yr, shot_r
