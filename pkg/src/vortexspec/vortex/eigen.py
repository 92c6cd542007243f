"""Eigenvalue searches for the radial equation: Kelvin modes, axisymmetric,
two-dimensional and general (m, k) perturbations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics.roots import MissFunction, find_complex_roots, refine_brackets
from ..profiles import VortexProfile, check_assumptions
from .modes import FourierMode, SpectralParam, s_from_ab
from .radial import CriticalLayerError, RadialProblem, RadialSolution, outer_radius

ESSENTIAL_BUFFER = 1e-3


@dataclass
class KelvinResult:
    upper: list  # RadialSolution, b decreasing toward sup Omega
    negative: list  # RadialSolution with b < 0, if any
    requested: int
    bracket: tuple
    message: str = ""

    @property
    def b_values(self) -> np.ndarray:
        return np.array([sol.b for sol in self.upper])


@dataclass
class SearchResult:
    solutions: list
    rejected: list = field(default_factory=list)  # (s, reason)
    region: tuple | None = None
    inconclusive_cells: list = field(default_factory=list)
    excluded_note: str = ""

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([sol.s for sol in self.solutions], dtype=complex)

    def __len__(self):
        return len(self.solutions)


def _real_roots_of(f, grid, xtol=1e-13):
    """Sign changes of a batched real function on a grid, polished together."""
    vals = f(grid)
    sgn = np.sign(vals)
    idx = np.flatnonzero((sgn[:-1] * sgn[1:] < 0) & np.isfinite(vals[:-1]) & np.isfinite(vals[1:]))
    if idx.size == 0:
        return np.empty(0), np.empty(0)
    roots, res = refine_brackets(f, grid[idx], grid[idx + 1], vals[idx], vals[idx + 1], xtol=xtol)
    return roots, res


def count_nodes(u: np.ndarray, grid: np.ndarray, rel: float = 1e-6) -> int:
    """Sign changes of Re(u) where |u| is not negligible."""
    v = np.real(u)
    keep = np.abs(v) > rel * np.max(np.abs(v))
    s = np.sign(v[keep])
    return int(np.sum(s[:-1] * s[1:] < 0))


def kelvin_modes_smooth(profile: VortexProfile, mode: FourierMode, count: int = 5,
                        negative: bool = True, floor: float = 1e-8,
                        tol: float = 1e-10) -> KelvinResult:
    """Neutral modes s = -i m b with b above the range of Omega.

    Roots of the (real) mismatch in b are bracketed on a geometric grid in
    b - Omega_max within (0, 2/|m|], refined toward the accumulation point
    down to ``floor``, and extended to the right if the largest root sits at
    the bracket edge. With ``negative`` the interval [-2/|m|, -1e-3] is also
    scanned and any roots there are reported.
    """
    m, k = mode.m, mode.k
    if m == 0 or k == 0:
        raise ValueError("Kelvin modes need m != 0 and k != 0")
    if count < 1:
        raise ValueError("count must be at least 1")
    problem = RadialProblem(profile, mode, tol=tol)
    om_max = float(np.max(profile.omega(np.geomspace(1e-6, 10.0, 2000))))
    om_max = max(om_max, float(profile.omega(0.0)))
    f = lambda b: problem.miss(-1j * m * np.asarray(b)).real

    width = 2.0 / abs(m)
    lo = 1e-2 * width
    message = ""
    while True:
        n = int(np.ceil(np.log(width / lo) / 0.04)) + 1
        grid = om_max + np.geomspace(lo, width, n)
        roots, _ = _real_roots_of(f, grid)
        roots = np.sort(roots)[::-1]
        if roots.size and roots[0] > om_max + 0.9 * width:
            width *= 2.0
            message = f"bracket expanded to {width:.3g}"
            continue
        if roots.size >= count or lo <= floor:
            break
        lo = max(lo * 1e-1, floor)
    found = roots[:count]
    if roots.size < count:
        message = (message + "; " if message else "") + \
            f"found {roots.size} of {count} requested roots above b - sup Omega = {lo:.1e}"

    upper = []
    for b in found:
        sol = problem.solve(-1j * m * b)
        sol.diagnostics["nodes"] = count_nodes(sol.u_r, sol.grid)
        upper.append(sol)

    neg = []
    if negative:
        grid = -np.geomspace(width, 1e-3, 200)
        roots, _ = _real_roots_of(f, grid)
        for b in np.sort(roots):
            sol = problem.solve(-1j * m * b)
            sol.diagnostics["nodes"] = count_nodes(sol.u_r, sol.grid)
            neg.append(sol)
    return KelvinResult(upper=upper, negative=neg, requested=count,
                        bracket=(om_max, om_max + width), message=message)


def axisymmetric_eigensolve(profile: VortexProfile, k: float, region=None,
                            tol: float = 1e-10) -> SearchResult:
    """Unstable axisymmetric (m = 0) modes.

    The equation depends on s only through mu = 1/s^2; for real s > 0 it is
    real, so the search is a sign-change scan in mu on [1/max(-Phi), mu_max]
    with ``region = s_min`` setting mu_max = 1/s_min^2 (default 0.02; smaller
    growth rates need exponentially large intermediate values).
    Eigenvalues come in pairs +-s; both are returned.
    """
    if k == 0:
        raise ValueError("axisymmetric modes need k != 0")
    mode = FourierMode(0, k)
    s_min = 0.02 if region is None else float(region)
    r = np.geomspace(1e-4, outer_radius(k), 4000)
    phi_min = float(np.min(profile.phi(r)))
    if phi_min >= 0:
        return SearchResult(solutions=[], region=(s_min,),
                            excluded_note="Rayleigh function non-negative: no unstable axisymmetric mode")
    problem = RadialProblem(profile, mode, tol=tol)
    mu_lo, mu_hi = 1.0 / (-phi_min), 1.0 / s_min ** 2
    mu = np.geomspace(mu_lo * (1 - 1e-9), mu_hi, int(np.log(mu_hi / mu_lo) / 0.02) + 2)
    f = lambda x: problem.miss(1.0 / np.sqrt(np.asarray(x))).real
    roots, _ = _real_roots_of(f, mu)
    sols = []
    for s in sorted(1.0 / np.sqrt(roots), reverse=True):
        for sign in (1.0, -1.0):
            sol = problem.solve(sign * s)
            sol.diagnostics["nodes"] = count_nodes(sol.u_r, sol.grid)
            sols.append(sol)
    return SearchResult(solutions=sols, region=(s_min,))


def auto_rectangle(profile: VortexProfile, mode: FourierMode, strip: float = 0.02,
                   b_range=(-0.5, 1.5)):
    """The (a, b) rectangles |a| in [strip, M], b in b_range."""
    from .identities import exclusion_bound_M
    M = exclusion_bound_M(profile, mode).M
    b0, b1 = b_range
    return [(strip, M, b0, b1), (-M, -strip, b0, b1)]


def ab_to_s_rect(m: int, rect):
    """Map an (a0, a1, b0, b1) rectangle to the s-plane (x0, x1, y0, y1)."""
    a0, a1, b0, b1 = rect
    re = sorted([m * a0, m * a1])
    im = sorted([-m * b0, -m * b1])
    return (re[0], re[1], im[0], im[1])


def _h1_like(profile: VortexProfile) -> bool:
    rep = check_assumptions(profile)
    return rep.h1_holds


def eigen_search_complex(profile: VortexProfile, mode: FourierMode, region=None,
                         n_seeds=(41, 41), tol: float = 1e-10, residual_tol: float = 1e-6,
                         exclude_analytic: bool = True, strip: float = ESSENTIAL_BUFFER,
                         problem: RadialProblem | None = None) -> SearchResult:
    """Complex eigenvalues off the imaginary axis for a general mode.

    ``region`` is a list of (a0, a1, b0, b1) rectangles (default: the auto
    rectangles with the |a| < ``strip`` band removed). For profiles with
    monotone vorticity the parts with b <= 0 or b >= sup Omega are removed
    before shooting, since no eigenvalue can lie there. Roots must pass the
    Howard identity check and the decay check to be accepted.
    """
    from .identities import howard_identity_residuals
    m = mode.m
    if m == 0:
        raise ValueError("use axisymmetric_eigensolve for m = 0")
    rects = auto_rectangle(profile, mode, strip=strip) if region is None else list(region)
    note = ""
    if exclude_analytic and _h1_like(profile):
        om_max = float(profile.omega(0.0))
        trimmed = []
        for a0, a1, b0, b1 in rects:
            nb0, nb1 = max(b0, 0.0), min(b1, om_max)
            if nb1 > nb0:
                trimmed.append((a0, a1, nb0, nb1))
        note = "b <= 0 and b >= sup Omega excluded (monotone vorticity)"
        rects = trimmed
    problem = problem or RadialProblem(profile, mode, tol=tol)
    miss = problem.miss_function(guard_strip=min(strip, ESSENTIAL_BUFFER))
    solutions, rejected, inconclusive = [], [], []
    for rect in rects:
        if abs(rect[0]) < ESSENTIAL_BUFFER and abs(rect[1]) < ESSENTIAL_BUFFER:
            continue
        srect = ab_to_s_rect(m, rect)
        res = find_complex_roots(miss, srect, n_seeds=n_seeds)
        inconclusive += res.inconclusive_cells
        for root in res.roots:
            sol = problem.solve(root.root)
            ok, reason = _accept(sol, profile, residual_tol, howard_identity_residuals)
            sol.diagnostics["winding_verified"] = root.winding_verified
            if ok:
                solutions.append(sol)
            else:
                rejected.append((root.root, reason))
    return SearchResult(solutions=solutions, rejected=rejected, region=tuple(rects),
                        inconclusive_cells=inconclusive, excluded_note=note)


def _accept(sol, profile, residual_tol, identities):
    if not (sol.boundary_decay > 0):
        return False, f"no decay at the outer boundary (rate {sol.boundary_decay:.3g})"
    hg = identities(sol, profile)
    if hg["hg0"] > residual_tol:
        return False, f"identity residual {hg['hg0']:.2e} above tolerance"
    sol.diagnostics["howard"] = hg
    return True, ""


def twod_eigensolve(profile: VortexProfile, m: int, region=None, n_seeds=(41, 41),
                    tol: float = 1e-10, residual_tol: float = 1e-6) -> SearchResult:
    """Two-dimensional (k = 0) modes by complex shooting.

    Returns empty without shooting when W' does not change sign.
    """
    mode = FourierMode(m, 0.0)
    r = np.geomspace(1e-4, 30.0, 4000)
    wp = np.asarray(profile.vorticity_prime(r))
    scale = np.max(np.abs(wp)) if wp.size else 0.0
    significant = np.abs(wp) > 1e-12 * scale
    if not (np.any(wp[significant] > 0) and np.any(wp[significant] < 0)) and not profile.breakpoints:
        return SearchResult(solutions=[], excluded_note="W' does not change sign: no 2D instability")
    if region is None:
        om = np.asarray(profile.omega(r))
        from .identities import exclusion_bound_M
        M = exclusion_bound_M(profile, mode).M
        region = [(ESSENTIAL_BUFFER, M, float(om.min()), float(om.max())),
                  (-M, -ESSENTIAL_BUFFER, float(om.min()), float(om.max()))]
    return eigen_search_complex(profile, mode, region=region, n_seeds=n_seeds, tol=tol,
                                residual_tol=residual_tol, exclude_analytic=False)
