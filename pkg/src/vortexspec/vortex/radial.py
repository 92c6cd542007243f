"""Radial stability equation of a columnar vortex and its shooting solver.

For a Fourier mode (m, k) and spectral parameter s the radial velocity
satisfies ``-(A u*)' + B u = 0`` with ``u* = u' + u/r``,
``A = r^2/(m^2 + k^2 r^2)`` and ``B = 1 + c1/gamma + c2/gamma^2`` where
``gamma = s + i m Omega``, ``c1 = i m r (W/(m^2+k^2 r^2))'`` and
``c2 = k^2 r^2 Phi/(m^2+k^2 r^2)``. The state vector is ``(u, A u*)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ..numerics.ode import IntegrationError
from ..numerics.quadrature import quad_weighted
from ..numerics.roots import MissFunction
from ..numerics.shooting import ShootingProblem, shoot_profiles, shoot_two_sided
from ..profiles import VortexProfile
from .modes import FourierMode, SpectralParam

R0 = 1e-4
R_MID = 2.0


class CriticalLayerError(ValueError):
    """gamma vanishes at a radius where the equation is singular."""


def outer_radius(k: float) -> float:
    return 30.0 if k == 0 else max(30.0, 10.0 / abs(k))


@dataclass(frozen=True)
class RadialCoefficients:
    A: object
    B: object
    D: object = None
    E: object = None
    c1: object = None
    c2: object = None


def _dq(profile, mode, r):
    """q = m^2 + k^2 r^2 together with (W/q)', (Omega/q)' and ((W+2Omega)/q)'."""
    m, k = mode.m, mode.k
    q = m * m + k * k * r * r
    w, wp = profile.vorticity(r), profile.vorticity_prime(r)
    om, omp = profile.omega(r), profile.omega_prime(r)
    dq = 2.0 * k * k * r
    d_w = wp / q - w * dq / q ** 2
    d_om = omp / q - om * dq / q ** 2
    return q, d_w, d_om


def critical_range(profile: VortexProfile, R: float, r0: float = R0):
    """Range of Omega over radii where the singular terms of B are active."""
    r = np.geomspace(r0, R, 4000)
    w = np.abs(profile.vorticity(r)) + np.abs(profile.vorticity_prime(r))
    active = w > 1e-300
    if not np.any(active):
        return None
    om = np.asarray(profile.omega(r))[active]
    return float(om.min()), float(om.max())


def build_coefficients(profile: VortexProfile, mode: FourierMode, s: complex,
                       check_grid=None) -> RadialCoefficients:
    """Coefficient functions A, B (and D, E for m != 0) of the radial equations.

    D and E are the coefficients of the equations satisfied by
    ``u/gamma_star`` and ``u/gamma_star^(1/2)``.
    """
    m, k = mode.m, mode.k
    s = complex(s)
    sp = SpectralParam(s, m) if m != 0 else None
    r_chk = np.geomspace(R0, outer_radius(k), 2000) if check_grid is None else check_grid
    gam = s + 1j * m * np.asarray(profile.omega(r_chk))
    if np.any(gam == 0) or (s.real == 0 and _crosses_zero(gam.imag, profile, r_chk)):
        raise CriticalLayerError(f"gamma vanishes on the grid for s = {s}")

    def A(r):
        r = np.asarray(r, dtype=float)
        return r * r / (m * m + k * k * r * r)

    def c1(r):
        r = np.asarray(r, dtype=float)
        _, d_w, _ = _dq(profile, mode, r)
        return 1j * m * r * d_w

    def c2(r):
        r = np.asarray(r, dtype=float)
        return k * k * r * r * profile.phi(r) / (m * m + k * k * r * r)

    def B(r):
        r = np.asarray(r, dtype=float)
        g = s + 1j * m * np.asarray(profile.omega(r))
        return 1.0 + c1(r) / g + c2(r) / g ** 2

    if m == 0:
        return RadialCoefficients(A=A, B=B, c1=c1, c2=c2)

    ratio = k * k / (m * m)

    def gstar(r):
        return profile.omega(r) - sp.b - 1j * sp.a

    def D(r):
        r = np.asarray(r, dtype=float)
        g = gstar(r)
        _, _, d_om = _dq(profile, mode, r)
        return g * g + 2.0 * r * g * d_om - ratio * A(r) * profile.phi(r)

    def E(r):
        r = np.asarray(r, dtype=float)
        g = gstar(r)
        _, d_w, d_om = _dq(profile, mode, r)
        return (g + 0.5 * r * (d_w + 2.0 * d_om)
                + 0.25 * profile.omega_prime(r) ** 2 * A(r) / g
                - ratio * A(r) * profile.phi(r) / g)

    return RadialCoefficients(A=A, B=B, D=D, E=E, c1=c1, c2=c2)


def _crosses_zero(im_gamma, profile, r):
    # a sign change of Im(gamma) where W or W' is active marks a critical layer
    act = (np.abs(profile.vorticity(r)) + np.abs(profile.vorticity_prime(r))) > 1e-300
    g = im_gamma[act]
    return bool(np.any(g[:-1] * g[1:] <= 0)) if g.size > 1 else False


def far_field_ratio(mode: FourierMode, R: float) -> complex:
    """u/(A u*) at R for the decaying solution where the vorticity has vanished.

    With W = 0 the equation reduces to one solved by u = P', A u* = P,
    P = K_m(|k| r) (or r^-|m| when k = 0).
    """
    m, k = abs(mode.m), abs(mode.k)
    if k == 0:
        return -m / R
    x = k * R
    kv = special.kve(m, x)
    kvp = -0.5 * (special.kve(m - 1, x) + special.kve(m + 1, x)) if m > 0 else -special.kve(1, x)
    return k * kvp / kv


def far_field_solution(mode: FourierMode, r, r_ref: float):
    """Decaying (u, A u*) beyond the vorticity, scaled to flux 1 at r_ref."""
    m, k = abs(mode.m), abs(mode.k)
    r = np.asarray(r, dtype=float)
    if k == 0:
        flux = (r_ref / r) ** m
        return -m / r * flux, flux
    kv = special.kve(m, k * r)
    kvp = -0.5 * (special.kve(m - 1, k * r) + special.kve(m + 1, k * r)) if m > 0 else -special.kve(1, k * r)
    flux = kv / special.kve(m, k * r_ref) * np.exp(-k * (r - r_ref))
    return k * kvp / kv * flux, flux


@dataclass
class RadialSolution:
    mode: FourierMode
    s: complex
    grid: np.ndarray
    u_r: np.ndarray
    flux: np.ndarray  # A (u_r' + u_r/r)
    u_theta: np.ndarray | None = None
    u_z: np.ndarray | None = None
    p: np.ndarray | None = None
    residual: float = float("nan")
    boundary_decay: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    @property
    def a(self) -> float:
        return SpectralParam(self.s, self.mode.m).a

    @property
    def b(self) -> float:
        return SpectralParam(self.s, self.mode.m).b


class RadialProblem:
    """Two-sided shooting formulation of the radial equation for one mode."""

    def __init__(self, profile: VortexProfile, mode: FourierMode, r0: float = R0,
                 r_mid: float = R_MID, R: float | None = None, tol: float = 1e-10,
                 perturbation=None):
        self.profile = profile
        self.mode = mode
        self.r0 = r0
        self.r_mid = r_mid
        self.R = outer_radius(mode.k) if R is None else R
        self.tol = tol
        # optional extra term added to B: callable (r, s) -> array, for manufactured tests
        self.perturbation = perturbation
        m, k = mode.m, mode.k
        self._m, self._k = m, k
        self.R_start = self._vorticity_edge() if perturbation is None else self.R
        self._tail = far_field_ratio(mode, self.R_start)
        jumps = []
        for rb, dw in profile.breakpoints:
            jumps.append((float(rb), self._jump_factory(float(rb), float(dw))))
        self.problem = ShootingProblem(self.rhs, self.left, self.right, jumps)

    def _vorticity_edge(self) -> float:
        """Radius beyond which W and W' are below 1e-18 everywhere up to R.

        There the far-field solution is exact, so the right shot can start
        at this radius instead of R without changing the mismatch.
        """
        r = np.linspace(self.r_mid, self.R, 2000)
        act = (np.abs(self.profile.vorticity(r)) > 1e-18) | (np.abs(self.profile.vorticity_prime(r)) > 1e-18)
        if not np.any(act):
            return float(self.r_mid * 1.5)
        last = int(np.flatnonzero(act)[-1])
        return float(r[min(last + 1, len(r) - 1)]) if last + 1 < len(r) else self.R

    def _jump_factory(self, rb, dw):
        m, k = self._m, self._k
        q = m * m + k * k * rb * rb
        om = float(self.profile.omega(rb))

        def jump(y, s):
            g = s + 1j * m * om
            return 1j * m * rb * dw / (q * g) * y[0]
        return jump

    def coefficients_at(self, r):
        m, k = self._m, self._k
        om, _, w, wp = self.profile.evaluate(r)
        q = m * m + k * k * r * r
        d_w = wp / q - 2.0 * k * k * r * w / (q * q)
        return r * r / q, om, 1j * m * r * d_w, k * k * r * r * 2.0 * om * w / q

    def rhs(self, r, y, s):
        A, om, c1, c2 = self.coefficients_at(r)
        u, f = y[0], y[1]
        out = np.empty_like(y)
        out[0] = f / A - u / r
        if c1 == 0 and c2 == 0 and self.perturbation is None:
            out[1] = u
            return out
        g = s + 1j * self._m * om
        B = 1.0
        if c1 != 0:
            B = B + c1 / g
        if c2 != 0:
            B = B + c2 / (g * g)
        if self.perturbation is not None:
            B = B + self.perturbation(r, s)
        out[1] = B * u
        return out

    def left(self, s):
        s = np.asarray(s, dtype=complex)
        m, k, r0 = self._m, self._k, self.r0
        u = np.ones_like(s)
        if m != 0:
            f = (r0 * r0 / (m * m + k * k * r0 * r0)) * abs(m) / r0 * u
        else:
            f = 2.0 / (k * k * r0) * u
        return np.stack([u, f])

    def right(self, s):
        s = np.asarray(s, dtype=complex)
        f = np.ones_like(s)
        return np.stack([self._tail * f, f])

    def miss(self, s, normalize: bool = False):
        """Wronskian mismatch at r_mid for an array of s (batched)."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                return shoot_two_sided(self.problem, s, self.r0, self.r_mid, self.R_start,
                                       tol=self.tol, normalize=normalize)
        except IntegrationError:
            if s.size == 1:
                return np.full(1, np.nan + 0j)
        # isolate the failing members of the batch
        return np.concatenate([self.miss(z[None], normalize) for z in s])

    def miss_function(self, guard_strip: float = 1e-3) -> MissFunction:
        m = self._m

        def guard(s):
            s = np.asarray(s, dtype=complex)
            if m == 0:
                return np.abs(s.real) >= guard_strip
            return np.abs((s / m).real) >= guard_strip
        return MissFunction(self.miss, guard)

    def default_grid(self, n_inner: int = 600, spacing: float = 0.01) -> np.ndarray:
        inner = np.geomspace(self.r0, 1.0, n_inner)
        outer = np.linspace(1.0, self.R, int(np.ceil((self.R - 1.0) / spacing)) + 1)
        pts = [self.r_mid] + [rb for rb, _ in self.profile.breakpoints]
        return np.unique(np.concatenate([inner, outer, pts]))

    def critical_layer_nodes(self, s: complex, n: int = 801, halfwidths: float = 20.0) -> np.ndarray:
        """Extra nodes clustered where Omega(r) = b, with width |a|/|Omega'|."""
        m = self._m
        if m == 0:
            return np.empty(0)
        a, b = (s / m).real, -(s / m).imag
        r = np.geomspace(self.r0, self.R, 4000)
        d = np.asarray(self.profile.omega(r)) - b
        idx = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)
        out = []
        for i in idx:
            rc = r[i] - d[i] * (r[i + 1] - r[i]) / (d[i + 1] - d[i]) if d[i + 1] != d[i] else r[i]
            slope = abs(float(self.profile.omega_prime(rc)))
            w = max(abs(a) / slope, 1e-6) if slope > 0 else 1e-2
            out.append(np.linspace(max(rc - halfwidths * w, self.r0), min(rc + halfwidths * w, self.R), n))
        return np.concatenate(out) if out else np.empty(0)

    def solve(self, s: complex, grid=None, reconstruct: bool = True) -> RadialSolution:
        """Eigenfunction for an (approximate) eigenvalue s.

        The two shots are joined at r_mid by a least-squares scale factor;
        the result is normalized to unit L2(r dr) norm with the value of
        largest modulus real and positive. For m != 0 the regular solution
        is scaled so that u ~ r^(|m|-1) near the axis before normalization.
        """
        s = complex(s)
        if grid is None:
            grid = np.unique(np.concatenate([self.default_grid(), self.critical_layer_nodes(s)]))
        grid = np.asarray(grid, dtype=float)
        Rs = self.R_start
        inside = grid[grid <= Rs]
        outside = grid[grid > Rs]
        yl, shot_l, yr, shot_r = shoot_profiles(self.problem, np.array([s]), self.r0,
                                               self.r_mid, Rs, inside, tol=self.tol)
        zl, zr = yl[:, 0], yr[:, 0]
        scale = (zl[0] * np.conj(zr[0]) + zl[1] * np.conj(zr[1])) / (abs(zr[0]) ** 2 + abs(zr[1]) ** 2)
        mismatch = abs(zl[0] * zr[1] - zr[0] * zl[1]) / (np.linalg.norm(zl) * np.linalg.norm(zr))
        yo = np.stack(far_field_solution(self.mode, outside, Rs), axis=1).astype(complex)
        r = np.concatenate([shot_l.r, shot_r.r, outside])
        y = np.concatenate([shot_l.y[:, :, 0], scale * shot_r.y[:, :, 0], scale * yo])
        order = np.argsort(r, kind="stable")
        r, y = r[order], y[order]
        u, flux = y[:, 0], y[:, 1]

        norm = np.sqrt(abs(quad_weighted(np.abs(u) ** 2, r, "r")))
        imax = int(np.argmax(np.abs(u)))
        phase = u[imax] / abs(u[imax])
        u, flux = u / (norm * phase), flux / (norm * phase)

        tail = slice(-6, None)
        with np.errstate(divide="ignore"):
            lu = np.log(np.abs(u[tail]))
        decay = float(-np.polyfit(r[tail], lu, 1)[0]) if np.all(np.isfinite(lu)) else float("nan")
        sol = RadialSolution(mode=self.mode, s=s, grid=r, u_r=u, flux=flux,
                             residual=float(mismatch), boundary_decay=decay,
                             diagnostics={"R": self.R, "R_start": Rs, "r0": self.r0,
                                          "r_mid": self.r_mid})
        if reconstruct:
            reconstruct_fields(sol, self.profile)
        return sol


def reconstruct_fields(solution: RadialSolution, profile: VortexProfile) -> RadialSolution:
    """Fill in u_theta, u_z and p from u_r and its flux.

    Uses p = A (i m W u_r / r - gamma u_r*) together with the azimuthal and
    axial momentum balances. Stores the divergence residual and the radial
    momentum residual (with p' evaluated analytically) in ``diagnostics``.
    """
    m, k = solution.mode.m, solution.mode.k
    r = solution.grid
    s = solution.s
    om = profile.omega(r)
    w = profile.vorticity(r)
    gam = s + 1j * m * om
    if np.any(np.abs(gam) == 0):
        raise CriticalLayerError("gamma vanishes on the solution grid")
    q = m * m + k * k * r * r
    A = r * r / q
    u, flux = solution.u_r, solution.flux
    ustar = flux / A
    p = 1j * m * w * A * u / r - gam * flux
    with np.errstate(divide="ignore", invalid="ignore"):
        u_theta = -(w * u + 1j * m * p / r) / gam
        u_z = -1j * k * p / gam
    solution.u_theta, solution.u_z, solution.p = u_theta, u_z, p

    div = ustar + 1j * m * u_theta / r + 1j * k * u_z
    scale = np.sqrt(quad_weighted(np.abs(ustar) ** 2, r, "r"))
    solution.diagnostics["divergence_residual"] = float(
        np.sqrt(abs(quad_weighted(np.abs(div) ** 2, r, "r"))) / scale)

    # radial momentum: gamma u - 2 Omega u_theta + p' = 0
    wp = profile.vorticity_prime(r)
    omp = profile.omega_prime(r)
    c1 = 1j * m * r * (wp / q - 2 * k * k * r * w / q ** 2)
    c2 = k * k * r * r * 2.0 * om * w / q
    with np.errstate(divide="ignore", invalid="ignore"):
        B = 1.0 + np.where(c1 != 0, c1 / gam, 0) + np.where(c2 != 0, c2 / gam ** 2, 0)
    du = flux / A - u / r
    dflux = B * u
    d_wa_r = wp * r / q + w * (m * m - k * k * r * r) / q ** 2
    dp = (1j * m * (d_wa_r * u + w * r / q * du)
          - 1j * m * omp * flux - gam * dflux)
    mom = gam * u - 2.0 * om * u_theta + dp
    mscale = np.sqrt(quad_weighted(np.abs(gam * u) ** 2 + np.abs(dp) ** 2, r, "r"))
    solution.diagnostics["momentum_residual"] = float(
        np.sqrt(abs(quad_weighted(np.abs(mom) ** 2, r, "r"))) / mscale)
    return solution
