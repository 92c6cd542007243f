"""Integral identities, exclusion bounds and Richardson numbers for vortex modes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..numerics.quadrature import quad_weighted
from ..profiles import VortexProfile, richardson_infimum, richardson_profile
from .modes import FourierMode
from .radial import RadialSolution, outer_radius


@dataclass
class ExclusionBound:
    C: float
    M: float
    S1: float
    S2: float
    r_S1: float
    r_S2: float


def _refine_max(fn, grid):
    vals = fn(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: -float(fn(np.array([x]))[0]),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12 * max(1.0, hi)})
        if -res.fun > vals[i]:
            return float(-res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def exclusion_bound_M(profile: VortexProfile, mode: FourierMode, grid=None) -> ExclusionBound:
    """C = max(S1, S2) and M = max(1, 2C).

    S1 = sup m^2 |r (W/(m^2+k^2 r^2))'| and S2 = sup k^2 A |Phi|, so that
    |1 - B| <= (C/m^2)(1/|a| + 1/|a|^2) and Re B > 0 whenever |a| > M.
    Jumps of W (Rankine) are not included; they only enter through the
    interface condition.
    """
    m, k = mode.m, mode.k
    if m == 0:
        raise ValueError("the exclusion bound needs m != 0")
    r = np.geomspace(1e-4, max(outer_radius(k), profile.r_cut), 6000) if grid is None else np.asarray(grid)

    def s1(x):
        q = m * m + k * k * x * x
        dw = (np.asarray(profile.vorticity_prime(x)) / q
              - 2.0 * k * k * x * np.asarray(profile.vorticity(x)) / q ** 2)
        return m * m * np.abs(x * dw)

    def s2(x):
        q = m * m + k * k * x * x
        return k * k * x * x / q * np.abs(np.asarray(profile.phi(x)))

    S1, r1 = _refine_max(s1, r)
    S2, r2 = _refine_max(s2, r)
    C = max(S1, S2)
    return ExclusionBound(C=C, M=max(1.0, 2.0 * C), S1=S1, S2=S2, r_S1=r1, r_S2=r2)


def coefficient_B(profile: VortexProfile, mode: FourierMode, a: float, b: float, r):
    """B(r) in the (a, b) parametrization."""
    m, k = mode.m, mode.k
    r = np.asarray(r, dtype=float)
    q = m * m + k * k * r * r
    gs = profile.omega(r) - b - 1j * a
    dw = profile.vorticity_prime(r) / q - 2 * k * k * r * profile.vorticity(r) / q ** 2
    return 1.0 + r * dw / gs - (k * k / (m * m)) * (r * r / q) * profile.phi(r) / gs ** 2


def hg0_im_bracket(profile, mode, a, b, r):
    """Braces of the imaginary-part identity; times |u|^2 r it is the integrand."""
    m, k = mode.m, mode.k
    r = np.asarray(r, dtype=float)
    q = m * m + k * k * r * r
    om = profile.omega(r)
    den = a * a + (om - b) ** 2
    dw = profile.vorticity_prime(r) / q - 2 * k * k * r * profile.vorticity(r) / q ** 2
    return (r / den * dw
            + 2.0 * (b - om) / den ** 2 * (k * k / (m * m)) * (r * r / q) * profile.phi(r))


def hg1_integrand(profile, mode, a, b, r, w, wstar):
    """Integrand (without the 2a prefactor) of the identity for w = u/gamma_star."""
    m, k = mode.m, mode.k
    r = np.asarray(r, dtype=float)
    q = m * m + k * k * r * r
    om = profile.omega(r)
    d_om = profile.omega_prime(r) / q - 2 * k * k * r * om / q ** 2
    A = r * r / q
    return ((b - om) * (A * np.abs(wstar) ** 2 + np.abs(w) ** 2)
            - r * d_om * np.abs(w) ** 2) * r


def hg_half_bracket(profile, mode, a, b, r):
    """A/(a^2+(Omega-b)^2) (k^2 Phi/m^2 - Omega'^2/4): the indefinite part."""
    m, k = mode.m, mode.k
    r = np.asarray(r, dtype=float)
    q = m * m + k * k * r * r
    om = profile.omega(r)
    A = r * r / q
    return A / (a * a + (om - b) ** 2) * (k * k * profile.phi(r) / (m * m)
                                          - 0.25 * profile.omega_prime(r) ** 2)


def hg_half_integrand(profile, mode, a, b, r, v, vstar):
    r = np.asarray(r, dtype=float)
    m, k = mode.m, mode.k
    A = r * r / (m * m + k * k * r * r)
    return (A * np.abs(vstar) ** 2 + np.abs(v) ** 2
            + hg_half_bracket(profile, mode, a, b, r) * np.abs(v) ** 2) * r


def _ratio(num, den):
    return 0.0 if den == 0 else float(abs(num) / den)


def howard_identity_residuals(solution: RadialSolution, profile: VortexProfile) -> dict:
    """Normalized residuals of the four quadratic identities on a solution.

    Each residual is |prefactor * integral| / integral of |integrand|, so it is
    invariant under u -> c u and the last three vanish identically when
    a = 0. Also reports whether the branch of gamma_star^(1/2) had to cross
    the cut along the grid.
    """
    mode = solution.mode
    m, k = mode.m, mode.k
    r = solution.grid
    u, flux = solution.u_r, solution.flux
    q = m * m + k * k * r * r
    A = r * r / q
    ustar = flux / A
    s = solution.s
    om = profile.omega(r)
    gam = s + 1j * m * om
    w, wp = profile.vorticity(r), profile.vorticity_prime(r)
    c1 = 1j * m * r * (wp / q - 2 * k * k * r * w / q ** 2)
    c2 = k * k * r * r * profile.phi(r) / q
    with np.errstate(divide="ignore", invalid="ignore"):
        B = 1.0 + np.where(c1 != 0, c1 / gam, 0) + np.where(c2 != 0, c2 / gam ** 2, 0)
    f0 = (A * np.abs(ustar) ** 2 + B * np.abs(u) ** 2) * r
    num0 = quad_weighted(f0, r)
    den0 = quad_weighted((A * np.abs(ustar) ** 2 + np.abs(B) * np.abs(u) ** 2) * r, r)
    # boundary terms of the integration by parts (the far-field tail beyond R)
    bterm = r[-1] * np.conj(u[-1]) * flux[-1] - r[0] * np.conj(u[0]) * flux[0]
    num0 -= bterm
    den0 += abs(bterm)
    for rb, dw in profile.breakpoints:
        # point mass of B at a vorticity jump
        i = int(np.argmin(np.abs(r - rb)))
        qb = m * m + k * k * rb * rb
        gb = s + 1j * m * float(profile.omega(rb))
        delta = 1j * m * rb * dw / (qb * gb) * abs(u[i]) ** 2 * rb
        num0 += delta
        den0 += abs(delta)
    out = {"hg0": _ratio(num0, den0), "hg0_im": 0.0, "hg1": 0.0, "hg_half": 0.0,
           "branch_crossing": False}
    if m == 0:
        return out

    a = (s / m).real
    b = -(s / m).imag
    gs = om - b - 1j * a
    f_im = hg0_im_bracket(profile, mode, a, b, r) * np.abs(u) ** 2 * r
    out["hg0_im"] = _ratio(a * quad_weighted(f_im, r), quad_weighted(np.abs(f_im), r))

    omp = profile.omega_prime(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        wv = u / gs
        wstar = ustar / gs - u * omp / gs ** 2
    f1 = hg1_integrand(profile, mode, a, b, r, wv, wstar)
    if np.all(np.isfinite(f1)):
        out["hg1"] = _ratio(a * quad_weighted(f1, r), quad_weighted(np.abs(f1), r))
    else:
        out["hg1"] = float("nan") if a != 0 else 0.0

    ang = np.angle(gs)
    out["branch_crossing"] = bool(np.any(np.abs(np.diff(ang)) > np.pi))
    root = np.sqrt(gs)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = u / root
        vstar = ustar / root - 0.5 * u * omp / (gs * root)
    fh = hg_half_integrand(profile, mode, a, b, r, v, vstar)
    if np.all(np.isfinite(fh)):
        out["hg_half"] = _ratio(a * quad_weighted(fh, r), quad_weighted(np.abs(fh), r))
    else:
        out["hg_half"] = float("nan") if a != 0 else 0.0
    return out


def richardson_number(profile: VortexProfile, mode: FourierMode, r):
    """Ri(r) = (k^2/m^2) Phi/Omega'^2."""
    if mode.m == 0:
        raise ValueError("the Richardson number needs m != 0")
    return (mode.k ** 2 / mode.m ** 2) * np.asarray(richardson_profile(profile, r))


def richardson_min(profile: VortexProfile, mode: FourierMode, scan_grid=None) -> float:
    """Infimum of Ri over r > 0, including the large-r limit."""
    if mode.m == 0:
        raise ValueError("the Richardson number needs m != 0")
    return (mode.k ** 2 / mode.m ** 2) * richardson_infimum(profile, scan_grid)
