"""Forced radial problem (s - L) u = f for one Fourier mode.

The forced momentum and continuity equations are written as a first-order
system for (u_r, p) and solved by variation of parameters, using the
solution regular at the axis and the solution decaying at infinity as a
fundamental system.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from ..numerics.quadrature import quad_weighted
from ..numerics.shooting import _shoot
from ..profiles import VortexProfile
from .modes import FourierMode
from .radial import RadialProblem, far_field_solution


@dataclass
class ResolventResult:
    s: complex
    mode: FourierMode
    grid: np.ndarray
    u_r: np.ndarray
    u_theta: np.ndarray
    u_z: np.ndarray
    p: np.ndarray
    gain: float  # ||u|| / ||f|| in L2(r dr)
    condition: float
    diagnostics: dict = field(default_factory=dict)


def divergence_free_forcing(mode: FourierMode, width: float = 1.0):
    """A smooth, regular, solenoidal forcing for the given mode.

    For m != 0 it is built from psi = r^|m| exp(-(r/width)^2) as
    f = (i m psi / r, -psi', 0); for m = 0 as f = (-i k psi, 0, (r psi)'/r)
    with psi = r exp(-(r/width)^2).
    """
    m, k = mode.m, mode.k

    def forcing(r):
        r = np.asarray(r, dtype=float)
        x = (r / width) ** 2
        e = np.exp(-x)
        if m != 0:
            n = abs(m)
            psi = r ** n * e
            dpsi = (n * r ** (n - 1) - 2.0 * r ** (n + 1) / width ** 2) * e
            return 1j * m * psi / r, -dpsi + 0j, np.zeros_like(r, dtype=complex)
        psi = r * e
        d_rpsi = (2.0 * r - 2.0 * r ** 3 / width ** 2) * e
        return -1j * k * psi + 0j, np.zeros_like(r, dtype=complex), d_rpsi / r + 0j
    return forcing


def _cumulative(values, r):
    return (cumulative_simpson(values.real, x=r, initial=0.0)
            + 1j * cumulative_simpson(values.imag, x=r, initial=0.0))


def _axis_integral(values, r):
    """Integral from 0 to r[0], assuming a power law through the first two nodes."""
    v0, v1 = abs(values[0]), abs(values[1])
    if v0 == 0 or v1 == 0:
        return 0.0
    e = np.log(v1 / v0) / np.log(r[1] / r[0])
    return values[0] * r[0] / (e + 1.0) if e > -1.0 else 0.0


def _fundamental(problem: RadialProblem, s: complex, grid: np.ndarray):
    """Regular and decaying solutions (u, A u*) sampled on the whole grid."""
    p = np.array([s])
    pb = problem.problem
    r0, Rs = problem.r0, problem.R_start
    _, left = _shoot(pb, p, r0, grid[-1], pb.left(p), problem.tol, r_eval=grid)
    inside = grid[grid <= Rs]
    outside = grid[grid > Rs]
    _, right = _shoot(pb, p, Rs, r0, pb.right(p), problem.tol, r_eval=inside)
    yl = left.y[np.argsort(left.r), :, 0]
    order = np.argsort(right.r)
    yr_in = right.y[order, :, 0]
    yr_out = np.stack(far_field_solution(problem.mode, outside, Rs), axis=1).astype(complex)
    yr = np.concatenate([yr_in, yr_out])
    return yl, yr


def resolvent_probe(profile: VortexProfile, mode: FourierMode, s: complex, forcing=None,
                    grid=None, tol: float = 1e-10) -> ResolventResult:
    """Solve the forced linear problem at s and return the gain ||u||/||f||.

    ``forcing`` maps r to (f_r, f_theta, f_z); the default is
    :func:`divergence_free_forcing`. Requires Re(s) != 0. The condition
    number reported is |Y_L||Y_R| / |det(Y_L, Y_R)| at the matching radius
    for Y = (u_r, p), which blows up
    as s approaches an eigenvalue or the essential spectrum.
    """
    s = complex(s)
    if s.real == 0:
        raise ValueError("resolvent_probe needs Re(s) != 0")
    forcing = divergence_free_forcing(mode) if forcing is None else forcing
    problem = RadialProblem(profile, mode, tol=tol)
    if grid is None:
        grid = np.unique(np.concatenate([problem.default_grid(), problem.critical_layer_nodes(s)]))
    r = np.asarray(grid, dtype=float)
    m, k = mode.m, mode.k
    q = m * m + k * k * r * r
    A = r * r / q
    om = np.asarray(profile.omega(r))
    w = np.asarray(profile.vorticity(r))
    gam = s + 1j * m * om

    yl, yr = _fundamental(problem, s, r)
    # homogeneous pressure from the flux
    pl = 1j * m * w * A * yl[:, 0] / r - gam * yl[:, 1]
    pr = 1j * m * w * A * yr[:, 0] / r - gam * yr[:, 1]
    ul, ur = yl[:, 0], yr[:, 0]
    det = ul * pr - ur * pl

    f_r, f_t, f_z = (np.asarray(c, dtype=complex) * np.ones_like(r) for c in forcing(r))
    g = 1j * m * f_t / r + 1j * k * f_z
    n1 = -g / gam
    n2 = f_r + 2.0 * om * f_t / gam
    d_alpha = (n1 * pr - n2 * ur) / det
    d_beta = (ul * n2 - pl * n1) / det
    beta = _cumulative(d_beta, r) + _axis_integral(d_beta, r)
    total = _cumulative(d_alpha, r)
    alpha = total - total[-1]

    u = alpha * ul + beta * ur
    p = alpha * pl + beta * pr
    u_t = (-1j * m * p / r + f_t - w * u) / gam
    u_z = (-1j * k * p + f_z) / gam

    norm_u = np.sqrt(abs(quad_weighted(np.abs(u) ** 2 + np.abs(u_t) ** 2 + np.abs(u_z) ** 2, r, "r")))
    norm_f = np.sqrt(abs(quad_weighted(np.abs(f_r) ** 2 + np.abs(f_t) ** 2 + np.abs(f_z) ** 2, r, "r")))
    size = np.hypot(np.abs(ul), np.abs(pl)) * np.hypot(np.abs(ur), np.abs(pr))
    i_mid = int(np.argmin(np.abs(r - problem.r_mid)))
    condition = float(size[i_mid] / abs(det[i_mid]))

    # residual of the continuity equation, from the flux form of u_r
    du = np.gradient(r * u, r) / r
    div = du + 1j * m * u_t / r + 1j * k * u_z
    scale = np.max(np.abs(du)) + np.max(np.abs(u_t / r)) + 1e-300
    inner = slice(5, -5)
    return ResolventResult(s=s, mode=mode, grid=r, u_r=u, u_theta=u_t, u_z=u_z, p=p,
                           gain=float(norm_u / norm_f), condition=condition,
                           diagnostics={"norm_u": float(norm_u), "norm_f": float(norm_f),
                                        "divergence_residual": float(np.max(np.abs(div[inner])) / scale)})
