"""Columnar vortex profiles: angular velocity, vorticity and their criteria.

A profile is described by the angular velocity Omega(r) and the axial
vorticity W(r) = r Omega'(r) + 2 Omega(r). Built-in profiles are normalized
to Omega(0) = 1, W(0) = 2 and have unit total circulation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

BUILTIN_KINDS = ("rankine", "lamb_oseen", "kaufmann_scully",
                 "scaled_kaufmann_scully", "shielded_gaussian")

_SMALL_R = 1e-6
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class VortexProfile:
    """Angular velocity and vorticity of a columnar vortex.

    All callables accept scalars or arrays of radii r >= 0. ``breakpoints``
    lists ``(r_b, jump)`` pairs where W jumps by ``jump`` (W(r_b+) - W(r_b-)).
    """

    omega: Callable
    omega_prime: Callable
    vorticity: Callable
    vorticity_prime: Callable
    r_cut: float = 30.0
    kind: str = "user"
    params: dict = field(default_factory=dict, hash=False, compare=False)
    breakpoints: tuple = ()
    spec: dict | None = field(default=None, hash=False, compare=False)
    # optional fast scalar evaluation r -> (Omega, Omega', W, W')
    pointwise: Callable | None = field(default=None, hash=False, compare=False)

    def evaluate(self, r: float):
        """(Omega, Omega', W, W') at a single radius."""
        if self.pointwise is not None:
            return self.pointwise(r)
        return (float(self.omega(r)), float(self.omega_prime(r)),
                float(self.vorticity(r)), float(self.vorticity_prime(r)))

    def phi(self, r):
        """Rayleigh function 2 Omega W."""
        return 2.0 * self.omega(r) * self.vorticity(r)

    def phi_prime(self, r):
        return 2.0 * (self.omega_prime(r) * self.vorticity(r)
                      + self.omega(r) * self.vorticity_prime(r))

    def omega_second(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.vorticity_prime(r) - 3.0 * self.omega_prime(r)) / r

    def velocity(self, r):
        return np.asarray(r, dtype=float) * self.omega(r)

    @property
    def is_smooth(self) -> bool:
        return len(self.breakpoints) == 0

    def to_spec(self) -> dict:
        if self.spec is not None:
            return dict(self.spec)
        return {"kind": self.kind, "params": dict(self.params)}


@dataclass
class CriteriaReport:
    h1_holds: bool
    h2_holds: bool
    witnesses: list
    gamma_circulation: float
    phi_min: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "h1_holds": self.h1_holds,
            "h2_holds": self.h2_holds,
            "gamma_circulation": self.gamma_circulation,
            "phi_min": self.phi_min,
            "witnesses": [{"r": r, "quantity": q, "value": v}
                          for r, q, v in self.witnesses],
            "notes": list(self.notes),
        }


def _vectorize(fn):
    def wrapped(r):
        r_arr = np.asarray(r, dtype=float)
        out = fn(np.atleast_1d(r_arr))
        return out.reshape(r_arr.shape) if r_arr.ndim else float(out[0])
    return wrapped


def _rankine():
    @_vectorize
    def omega(r):
        out = np.ones_like(r)
        outer = r > 1.0
        out[outer] = 1.0 / r[outer] ** 2
        return out

    @_vectorize
    def omega_prime(r):
        out = np.zeros_like(r)
        outer = r > 1.0
        out[outer] = -2.0 / r[outer] ** 3
        return out

    @_vectorize
    def vorticity(r):
        return np.where(r <= 1.0, 2.0, 0.0)

    @_vectorize
    def vorticity_prime(r):
        return np.zeros_like(r)

    def pointwise(r):
        if r <= 1.0:
            return 1.0, 0.0, 2.0, 0.0
        return 1.0 / (r * r), -2.0 / (r * r * r), 0.0, 0.0

    return omega, omega_prime, vorticity, vorticity_prime, ((1.0, -2.0),), pointwise


def _lamb_oseen():
    # series coefficients of (1 - (1 + x) e^-x) / x^2 = sum c_n x^n
    n = np.arange(0, 14)
    from math import factorial
    c = np.array([(-1) ** (j + 2) * (j + 1) / factorial(j + 2) for j in n])

    @_vectorize
    def omega(r):
        x = r * r
        out = np.ones_like(r)
        big = x > _SMALL_R ** 2
        out[big] = -np.expm1(-x[big]) / x[big]
        out[~big] = 1.0 - 0.5 * x[~big]
        return out

    @_vectorize
    def omega_prime(r):
        x = r * r
        out = np.empty_like(r)
        small = x < 0.1
        out[small] = -2.0 * r[small] * np.polyval(c[::-1], x[small])
        xb, rb = x[~small], r[~small]
        out[~small] = -2.0 * (1.0 - (1.0 + xb) * np.exp(-xb)) / rb ** 3
        return out

    @_vectorize
    def vorticity(r):
        return 2.0 * np.exp(-r * r)

    @_vectorize
    def vorticity_prime(r):
        return -4.0 * r * np.exp(-r * r)

    coeffs = [float(v) for v in c[::-1]]

    def pointwise(r):
        x = r * r
        e = math.exp(-x)
        om = -math.expm1(-x) / x if x > _SMALL_R ** 2 else 1.0 - 0.5 * x
        if x < 0.1:
            acc = 0.0
            for coef in coeffs:
                acc = acc * x + coef
            omp = -2.0 * r * acc
        else:
            omp = -2.0 * (1.0 - (1.0 + x) * e) / (r * x)
        return om, omp, 2.0 * e, -4.0 * r * e

    return omega, omega_prime, vorticity, vorticity_prime, (), pointwise


def _scaled_kaufmann_scully(eps: float):
    @_vectorize
    def omega(r):
        return 1.0 / (1.0 + eps * r * r)

    @_vectorize
    def omega_prime(r):
        return -2.0 * eps * r / (1.0 + eps * r * r) ** 2

    @_vectorize
    def vorticity(r):
        return 2.0 / (1.0 + eps * r * r) ** 2

    @_vectorize
    def vorticity_prime(r):
        return -8.0 * eps * r / (1.0 + eps * r * r) ** 3

    def pointwise(r):
        d = 1.0 / (1.0 + eps * r * r)
        return d, -2.0 * eps * r * d * d, 2.0 * d * d, -8.0 * eps * r * d * d * d

    return omega, omega_prime, vorticity, vorticity_prime, (), pointwise


def _shielded_gaussian():
    # Omega = exp(-r^2): zero net circulation, W changes sign at r = 1
    @_vectorize
    def omega(r):
        return np.exp(-r * r)

    @_vectorize
    def omega_prime(r):
        return -2.0 * r * np.exp(-r * r)

    @_vectorize
    def vorticity(r):
        return 2.0 * (1.0 - r * r) * np.exp(-r * r)

    @_vectorize
    def vorticity_prime(r):
        return -4.0 * r * (2.0 - r * r) * np.exp(-r * r)

    def pointwise(r):
        x = r * r
        e = math.exp(-x)
        return e, -2.0 * r * e, 2.0 * (1.0 - x) * e, -4.0 * r * (2.0 - x) * e

    return omega, omega_prime, vorticity, vorticity_prime, (), pointwise


def make_builtin(kind: str, parameters: dict | None = None, **kwargs) -> VortexProfile:
    """Closed-form profile by name.

    ``scaled_kaufmann_scully`` takes ``eps`` > 0; ``shielded_gaussian`` is a
    non-monotone test vortex with W = 2(1 - r^2) exp(-r^2).
    """
    params = dict(parameters or {})
    params.update(kwargs)
    if kind == "rankine":
        parts = _rankine()
    elif kind == "lamb_oseen":
        parts = _lamb_oseen()
    elif kind == "kaufmann_scully":
        parts = _scaled_kaufmann_scully(1.0)
    elif kind == "scaled_kaufmann_scully":
        if "eps" not in params:
            raise ValueError("scaled_kaufmann_scully needs parameter 'eps'")
        eps = float(params["eps"])
        if not eps > 0:
            raise ValueError(f"eps must be positive, got {eps}")
        params["eps"] = eps
        parts = _scaled_kaufmann_scully(eps)
    elif kind == "shielded_gaussian":
        parts = _shielded_gaussian()
    else:
        raise ValueError(f"unknown profile kind {kind!r}; expected one of {BUILTIN_KINDS}")
    omega, omega_prime, w, w_prime, bps, pointwise = parts
    tag = "user" if kind == "shielded_gaussian" else kind
    return VortexProfile(omega, omega_prime, w, w_prime, r_cut=30.0, kind=tag,
                         params=params, breakpoints=bps,
                         spec={"kind": kind, "params": params}, pointwise=pointwise)


def fd4_derivative(values, grid) -> np.ndarray:
    """Fourth-order finite-difference derivative on a (possibly non-uniform) grid.

    Five-point stencils, centred in the interior and one-sided at the ends.
    """
    x = np.asarray(grid, dtype=float)
    f = np.asarray(values, dtype=float)
    n = len(x)
    if n < 5:
        raise ValueError("need at least 5 grid points")
    out = np.empty(n)
    for i in range(n):
        lo = min(max(i - 2, 0), n - 5)
        idx = np.arange(lo, lo + 5)
        out[i] = _fornberg_first(x[i], x[idx]) @ f[idx]
    return out


def _fornberg_first(x0, nodes):
    # weights for the first derivative at x0 (Fornberg 1988)
    n = len(nodes)
    c = np.zeros((n, 2))
    c1, c4 = 1.0, nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, 1)
        c2, c5 = 1.0, c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, 1]


def _cumulative_moment(w, grid, breakpoints):
    """M(r_i) = int_0^{r_i} W(s) s ds by Gauss-Legendre on each interval."""
    edges = np.concatenate([[0.0], grid])
    cuts = sorted(b for b in breakpoints if 0.0 < b < grid[-1])
    pieces = np.zeros(len(grid))
    for i in range(len(grid)):
        a, b = edges[i], edges[i + 1]
        inner = [c for c in cuts if a < c < b]
        total = 0.0
        for lo, hi in zip([a] + inner, inner + [b]):
            half = 0.5 * (hi - lo)
            s = lo + half * (_GL_NODES + 1.0)
            total += half * np.dot(_GL_WEIGHTS, np.asarray(w(s)) * s)
        pieces[i] = total
    return np.cumsum(pieces)


def omega_from_vorticity(vorticity: Callable, grid, vorticity_prime: Callable | None = None,
                         breakpoints=(), kind: str = "tabulated",
                         spec: dict | None = None) -> VortexProfile:
    """Build a profile from W alone via Omega(r) = r^-2 int_0^r W(s) s ds.

    W is assumed to vanish beyond the last grid point. W' is taken from
    ``vorticity_prime`` when given, else from fourth-order differences of W on
    the grid. ``breakpoints`` are radii where W jumps.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 5:
        raise ValueError("grid must be one-dimensional with at least 5 points")
    if grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be non-negative and strictly increasing")
    bp_radii = [float(b) for b in breakpoints]
    # breakpoints become nodes so no interval straddles a jump
    grid = np.union1d(grid[grid > 0], [b for b in bp_radii if grid[0] < b < grid[-1]])

    moment = _cumulative_moment(vorticity, grid, bp_radii)
    if not np.all(np.isfinite(moment)):
        raise ValueError("quadrature of W r dr failed (non-finite values)")
    r_first, r_last = grid[0], grid[-1]
    r_near = min(r_first, 1e-3)
    m_last = moment[-1]
    w_fn = vorticity
    t01 = 0.5 * (_GL_NODES + 1.0)

    if vorticity_prime is None:
        wp_nodes = fd4_derivative(np.asarray(w_fn(grid), dtype=float), grid)
        wp_spline = CubicHermiteSpline(grid, wp_nodes, fd4_derivative(wp_nodes, grid))

        def vorticity_prime(r):
            # W' is odd about the axis, so extrapolate linearly to r = 0
            r = np.asarray(r, dtype=float)
            inner = wp_nodes[0] * r / r_first
            out = np.where(r > r_last, 0.0,
                           np.where(r < r_first, inner,
                                    wp_spline(np.clip(r, r_first, r_last))))
            return out if out.ndim else float(out)

    wp_fn = vorticity_prime

    def _moment(r):
        # M(r) = M(r_i) + int_{r_i}^r W s ds, with r_i the node just below r
        i = np.searchsorted(grid, r, side="right") - 1
        lo = np.where(i >= 0, grid[np.maximum(i, 0)], 0.0)
        base = np.where(i >= 0, moment[np.maximum(i, 0)], 0.0)
        half = 0.5 * (r - lo)
        s = lo[:, None] + half[:, None] * (_GL_NODES + 1.0)
        return base + half * ((np.asarray(w_fn(s)) * s) @ _GL_WEIGHTS)

    @_vectorize
    def omega(r):
        out = np.empty_like(r)
        near = r < r_near
        far = r > r_last
        mid = ~near & ~far
        vals = np.asarray(w_fn(np.multiply.outer(r[near], t01)))
        out[near] = 0.5 * (vals * t01) @ _GL_WEIGHTS
        out[mid] = _moment(r[mid]) / r[mid] ** 2
        out[far] = m_last / r[far] ** 2
        return out

    @_vectorize
    def omega_prime(r):
        out = np.empty_like(r)
        near = r < r_near
        vals = np.asarray(wp_fn(np.multiply.outer(r[near], t01)))
        out[near] = 0.5 * (vals * t01 ** 2) @ _GL_WEIGHTS
        rr = r[~near]
        out[~near] = (np.asarray(w_fn(rr)) - 2.0 * omega(rr)) / rr
        return out

    bps = tuple((float(b), float(w_fn(b + 1e-12) - w_fn(b - 1e-12))) for b in bp_radii)
    return VortexProfile(omega, omega_prime, _vectorize(lambda r: np.asarray(w_fn(r), float)),
                         _vectorize(lambda r: np.asarray(wp_fn(r), float)),
                         r_cut=float(r_last), kind=kind, params={}, breakpoints=bps,
                         spec=spec)


def tabulated_profile(r_values, w_values) -> VortexProfile:
    """Profile from sampled vorticity; W is Hermite-interpolated, zero beyond the data."""
    r = np.asarray(r_values, dtype=float)
    w = np.asarray(w_values, dtype=float)
    if r.shape != w.shape or r.ndim != 1:
        raise ValueError("r and w must be one-dimensional arrays of equal length")
    if np.any(np.diff(r) <= 0):
        raise ValueError("r must be strictly increasing")
    wp = fd4_derivative(w, r)
    interp = CubicHermiteSpline(r, w, wp)
    dinterp = interp.derivative()
    r_hi = r[-1]

    def w_fn(x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > r_hi, 0.0, interp(np.clip(x, r[0], r_hi)))
        return out if out.ndim else float(out)

    def wp_fn(x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > r_hi, 0.0, dinterp(np.clip(x, r[0], r_hi)))
        return out if out.ndim else float(out)

    grid = r[r > 0]
    spec = {"kind": "tabulated", "r": r.tolist(), "w": w.tolist()}
    return omega_from_vorticity(w_fn, grid, wp_fn, kind="tabulated", spec=spec)


def profile_from_spec(spec: dict) -> VortexProfile:
    """Inverse of :meth:`VortexProfile.to_spec`."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("profile specification must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "tabulated":
        if "r" not in spec or "w" not in spec:
            raise ValueError("tabulated profile needs 'r' and 'w' arrays")
        return tabulated_profile(spec["r"], spec["w"])
    params = spec.get("params", {}) or {}
    if kind == "user":
        name = params.get("name")
        if name is None:
            raise ValueError("user profile needs params.name")
        return make_builtin(name)
    return make_builtin(kind, params)


def rayleigh_function(profile: VortexProfile, r):
    return profile.phi(r)


def richardson_profile(profile: VortexProfile, r):
    """J(r) = Phi(r) / Omega'(r)^2; +inf where Omega' vanishes and Phi > 0."""
    r = np.asarray(r, dtype=float)
    op = np.asarray(profile.omega_prime(r), dtype=float)
    phi = np.asarray(profile.phi(r), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        j = phi / op ** 2
    j = np.where(op == 0.0, np.where(phi == 0.0, np.nan, np.copysign(np.inf, phi)), j)
    return j if j.ndim else float(j)


def richardson_profile_prime(profile: VortexProfile, r):
    r = np.asarray(r, dtype=float)
    op = np.asarray(profile.omega_prime(r), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        jp = (profile.phi_prime(r) / op ** 2
              - 2.0 * profile.phi(r) * profile.omega_second(r) / op ** 3)
    return jp


def total_circulation(profile: VortexProfile, r_check: float | None = None) -> float:
    """Gamma = int_0^inf W r dr; returns +inf when the tail does not decay."""
    f = lambda r: float(profile.vorticity(r)) * r
    pts = [b for b, _ in profile.breakpoints]
    r_check = r_check or max(1e4, 100.0 * profile.r_cut)
    edges = sorted(set([0.0] + pts + [1.0, 10.0, 100.0, profile.r_cut, r_check]))
    edges = [e for e in edges if e <= r_check]
    partial = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        partial += integrate.quad(f, lo, hi, limit=200, epsabs=1e-14, epsrel=1e-13)[0]
    tail_indicator = abs(float(profile.vorticity(r_check))) * r_check ** 2
    if tail_indicator > 1e-2 * abs(partial):
        return float("inf")
    tail = integrate.quad(f, r_check, np.inf, limit=200, epsabs=1e-15)[0]
    return partial + tail


def default_scan_grid(r_max: float = 200.0, n: int = 2000) -> np.ndarray:
    return np.geomspace(1e-3, r_max, n)


def check_assumptions(profile: VortexProfile, scan_grid=None,
                      tail_tol: float = 1e-4) -> CriteriaReport:
    """Grid test of monotone vorticity (H1) and monotone Richardson function (H2).

    Derivatives that vanish only because the function itself has underflowed
    to a negligible size are not counted as failures.
    """
    r = default_scan_grid() if scan_grid is None else np.asarray(scan_grid, dtype=float)
    r = r[r > 0]
    witnesses, notes = [], []

    gamma = total_circulation(profile)
    w = np.asarray(profile.vorticity(r))
    wp = np.asarray(profile.vorticity_prime(r))
    phi = np.asarray(profile.phi(r))
    phi_min = float(np.min(phi))

    h1 = True
    if profile.breakpoints:
        h1 = False
        for rb, jump in profile.breakpoints:
            witnesses.append((float(rb), "W_jump", float(jump)))
    wp0 = float(profile.vorticity_prime(0.0))
    if abs(wp0) > 1e-8:
        h1 = False
        witnesses.append((0.0, "W_prime", wp0))
    w_scale = np.max(np.abs(w))
    negligible = np.abs(w) <= 1e-12 * w_scale
    bad = ~((wp < 0) | ((wp == 0) & negligible))
    if np.any(bad):
        h1 = False
        witnesses += [(float(x), "W_prime", float(v)) for x, v in zip(r[bad], wp[bad])]
    if not np.isfinite(gamma):
        h1 = False
        witnesses.append((float(r[-1]), "circulation", gamma))
    tail_w = float(r[-1] * wp[-1])
    if abs(tail_w) >= tail_tol:
        h1 = False
        witnesses.append((float(r[-1]), "r_W_prime", tail_w))
    if phi_min < 0:
        neg = phi < 0
        witnesses += [(float(x), "phi", float(v)) for x, v in zip(r[neg], phi[neg])]

    h2 = True
    op = np.asarray(profile.omega_prime(r))
    flat = op == 0
    if np.any(flat):
        h2 = False
        witnesses += [(float(x), "omega_prime", 0.0) for x in r[flat]]
        notes.append("Omega' vanishes on part of the grid; J is undefined there")
    j = richardson_profile(profile, r)
    jp = richardson_profile_prime(profile, r)
    ok = ~flat
    j_scale = np.max(np.abs(j[ok])) if np.any(ok) else 0.0
    j_negligible = np.abs(j) <= 1e-12 * j_scale
    bad_j = ok & ~((jp < 0) | ((jp == 0) & j_negligible) | (~np.isfinite(jp) & j_negligible))
    if np.any(bad_j):
        h2 = False
        witnesses += [(float(x), "J_prime", float(v)) for x, v in zip(r[bad_j], jp[bad_j])]
    tail_j = float(r[-1] * jp[-1]) if ok[-1] else float("nan")
    if not (abs(tail_j) < tail_tol):
        h2 = False
        witnesses.append((float(r[-1]), "r_J_prime", tail_j))

    return CriteriaReport(h1_holds=h1, h2_holds=h2, witnesses=witnesses,
                          gamma_circulation=gamma, phi_min=phi_min, notes=notes)


def richardson_infimum(profile: VortexProfile, scan_grid=None) -> float:
    """inf_r J(r): grid minimum combined with the large-r limit.

    The limit is extrapolated assuming J = J_inf + c / r^2 far out, which is
    exact for algebraic profiles and harmless for exponentially decaying ones.
    """
    r = default_scan_grid(1e3, 2000) if scan_grid is None else np.asarray(scan_grid, float)
    j = np.asarray(richardson_profile(profile, r[r > 0]))
    finite = j[np.isfinite(j)]
    grid_min = float(np.min(finite)) if finite.size else float("inf")
    r1 = 1e3 * max(1.0, profile.r_cut / 30.0)
    j1, j2 = richardson_profile(profile, np.array([r1, 10 * r1]))
    if np.isfinite(j1) and np.isfinite(j2):
        limit = (100.0 * j2 - j1) / 99.0
        return min(grid_min, float(limit))
    return grid_min
