"""Channel eigenvalue problems on [0, L] with u_z(0) = u_z(L) = 0.

All equations are integrated as first-order systems for (u, rho u') from
z = 0 with u(0) = 0, u'(0) = 1; the mismatch is u(L). The Rayleigh-Taylor
problems are real in mu = 1/s^2 and solved by a sign-change scan in mu;
the Rayleigh and Taylor-Goldstein problems are searched in the complex
s-plane with winding-number verification.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics.ode import IntegrationError, integrate
from ..numerics.quadrature import quad_weighted
from ..numerics.roots import MissFunction, find_complex_roots, refine_brackets
from .profile import ShearProfile

RE_BUFFER = 1e-4


@dataclass
class ChannelEigenpair:
    s: complex
    k: float
    z: np.ndarray
    u_z: np.ndarray
    du_z: np.ndarray
    residual: float
    equation_tag: str  # RT, RT_boussinesq, rayleigh, taylor_goldstein
    diagnostics: dict = field(default_factory=dict)


@dataclass
class ChannelSearch:
    eigenpairs: list
    region: tuple | None = None
    inconclusive: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    message: str = ""

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([e.s for e in self.eigenpairs], dtype=complex)

    def __len__(self):
        return len(self.eigenpairs)

    def __iter__(self):
        return iter(self.eigenpairs)


def _check_k(k):
    if k == 0:
        raise ValueError("channel eigensolvers need k != 0")


def _normalize(u, du):
    """max |u| = 1 with the first nonzero sample real and positive."""
    scale = np.max(np.abs(u))
    nz = np.flatnonzero(np.abs(u) > 1e-12 * scale)
    phase = u[nz[0]] / abs(u[nz[0]]) if nz.size else 1.0
    return u / (scale * phase), du / (scale * phase)


# --- Rayleigh-Taylor: -(p u')' + k^2 p u = mu w u, mu = 1/s^2 -----------------

class _SturmPencil:
    """Shooting for -(p u')' + k^2 p u = mu w u, batched over real mu."""

    def __init__(self, p, w, k, L, tol):
        self.p, self.w, self.k, self.L, self.tol = p, w, k, L, tol
        z = np.linspace(0.0, L, 257)
        pz, wz = np.asarray(p(z)) * np.ones_like(z), np.asarray(w(z)) * np.ones_like(z)
        # constant coefficients skip the per-step profile calls
        self.constant = (float(pz[0]), float(wz[0])) if np.ptp(pz) == 0 and np.ptp(wz) == 0 else None

    def rhs(self, mu):
        p, w, k2, const = self.p, self.w, self.k ** 2, self.constant

        def f(z, y):
            pz, wz = const if const else (float(p(z)), float(w(z)))
            out = np.empty_like(y)
            out[0] = y[1] / pz
            out[1] = (k2 * pz - mu * wz) * y[0]
            return out
        return f

    def start(self, mu):
        return np.stack([np.zeros_like(mu), float(self.p(0.0)) * np.ones_like(mu)])

    def miss(self, mu):
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        res = integrate(self.rhs(mu), 0.0, self.L, self.start(mu), tol=self.tol)
        return res.y[0].real

    def solution(self, mu, z):
        mu = np.array([mu], dtype=float)
        res = integrate(self.rhs(mu), 0.0, self.L, self.start(mu), tol=self.tol, r_eval=z[1:])
        y = np.concatenate([self.start(mu)[None], res.y_eval])[:, :, 0]
        return y[:, 0], y[:, 1] / np.asarray(self.p(z))


def _mu_roots(pencil, mu_lo, n_max, max_ratio=1e8, ratio=1.01):
    """First n_max roots of the mismatch in |mu| >= mu_lo (mu_lo signed)."""
    sign = np.sign(mu_lo)
    a, found = abs(mu_lo), []
    span = 8.0
    while len(found) < n_max and span <= max_ratio:
        grid = sign * np.geomspace(a, abs(mu_lo) * span, int(np.log(abs(mu_lo) * span / a) / np.log(ratio)) + 2)
        vals = pencil.miss(grid)
        idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
        if idx.size:
            roots, _ = refine_brackets(pencil.miss, grid[idx], grid[idx + 1], vals[idx], vals[idx + 1],
                                       xtol=1e-13)
            found += sorted(roots.tolist(), key=abs)
        a = abs(mu_lo) * span
        span *= 8.0
    return found[:n_max]


def _rt_solve(p, w, k, L, n_max, tag, identity, tol):
    _check_k(k)
    z = np.linspace(0.0, L, 2001)
    wz = np.asarray(w(z)) * np.ones_like(z)
    pz = np.asarray(p(z)) * np.ones_like(z)
    pencil = _SturmPencil(p, w, k, L, tol)
    pairs, message = [], ""
    # Rayleigh quotient: |mu| >= k^2 min p / max |w| for each sign family
    for sgn in (1.0, -1.0):
        wmax = np.max(sgn * wz)
        if wmax <= 0:
            continue
        mu_lo = sgn * (1.0 - 1e-9) * k * k * np.min(pz) / wmax
        roots = _mu_roots(pencil, mu_lo, n_max)
        if len(roots) < n_max:
            message += f"found {len(roots)} of {n_max} modes with sign(mu) = {sgn:+.0f}; "
        for mu in roots:
            s = 1.0 / np.sqrt(mu) if mu > 0 else 1j / np.sqrt(-mu)
            u, du = pencil.solution(mu, z)
            u, du = _normalize(u, du)
            pairs.append(ChannelEigenpair(s=complex(s), k=k, z=z, u_z=u, du_z=du,
                                          residual=identity(z, u, du, mu), equation_tag=tag,
                                          diagnostics={"mu": mu, "nodes": _nodes(u)}))
    return ChannelSearch(eigenpairs=pairs, message=message.strip())


def _nodes(u):
    v = np.real(u[1:-1])
    keep = np.abs(v) > 1e-8
    sv = np.sign(v[keep])
    return int(np.sum(sv[:-1] * sv[1:] < 0))


def rt_eigs_full(profile: ShearProfile, k: float, n_max: int = 5, tol: float = 1e-11) -> ChannelSearch:
    """-(rho u')' + k^2 rho u - (k^2 g / s^2) rho' u = 0.

    Unstable real eigenvalues (from rho' > 0 somewhere) come first, ordered
    by decreasing s; then neutral ones s = i|s|, by decreasing |s|. Each
    family holds up to ``n_max`` members; -s is an eigenvalue as well.
    """
    rho, rhop, g = profile.rho, profile.rho_prime, profile.g

    def identity(z, u, du, mu):
        a = np.abs(du) ** 2 * rho(z)
        b = k * k * rho(z) * np.abs(u) ** 2
        c = -k * k * g * mu * rhop(z) * np.abs(u) ** 2
        num = quad_weighted(a + b + c, z)
        den = quad_weighted(np.abs(a) + np.abs(b) + np.abs(c), z)
        return float(abs(num) / den)

    w = lambda z: k * k * g * np.asarray(rhop(z))
    return _rt_solve(rho, w, k, profile.L, n_max, "RT", identity, tol)


def rt_eigs_boussinesq(profile: ShearProfile, k: float, n_max: int = 5, tol: float = 1e-11) -> ChannelSearch:
    """-u'' + k^2 (1 + N^2/s^2) u = 0 with N^2 = -g rho'/rho."""
    n2 = profile.N2

    def identity(z, u, du, mu):
        a = np.abs(du) ** 2
        b = k * k * np.abs(u) ** 2
        c = k * k * mu * n2(z) * np.abs(u) ** 2
        num = quad_weighted(a + b + c, z)
        den = quad_weighted(np.abs(a) + np.abs(b) + np.abs(c), z)
        return float(abs(num) / den)

    one = lambda z: np.ones_like(np.asarray(z, dtype=float))
    w = lambda z: -k * k * np.asarray(n2(z))
    return _rt_solve(one, w, k, profile.L, n_max, "RT_boussinesq", identity, tol)


# --- Taylor-Goldstein (and Rayleigh as rho = 1, g = 0) -------------------------

class ChannelProblem:
    """Complex shooting for the Taylor-Goldstein equation at wavenumber k."""

    def __init__(self, profile: ShearProfile, k: float, tol: float = 1e-10):
        _check_k(k)
        self.profile, self.k, self.tol = profile, k, tol
        self.L = profile.L

    def _coeffs(self, z):
        U, Up, Upp, rho, rhop = self.profile.evaluate(z)
        return rho, rhop, U, rhop * Up + rho * Upp

    def rhs(self, s):
        k, g = self.k, self.profile.g

        def f(z, y):
            rho, rhop, U, mg = self._coeffs(z)
            gam = s + 1j * k * U
            out = np.empty_like(y)
            out[0] = y[1] / rho
            out[1] = (k * k * rho + 1j * k * mg / gam - k * k * g * rhop / gam ** 2) * y[0]
            return out
        return f

    def start(self, s):
        return np.stack([np.zeros_like(s), float(self.profile.rho(0.0)) * np.ones_like(s)])

    def miss(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        try:
            with np.errstate(all="ignore"):
                return integrate(self.rhs(s), 0.0, self.L, self.start(s), tol=self.tol).y[0]
        except IntegrationError:
            if s.size == 1:
                return np.full(1, np.nan + 0j)
        return np.concatenate([self.miss(z[None]) for z in s])

    def miss_function(self) -> MissFunction:
        return MissFunction(self.miss, lambda s: np.abs(np.asarray(s).real) >= RE_BUFFER)

    def solution(self, s, z):
        s = np.array([s], dtype=complex)
        res = integrate(self.rhs(s), 0.0, self.L, self.start(s), tol=self.tol, r_eval=z[1:])
        y = np.concatenate([self.start(s)[None], res.y_eval])[:, :, 0]
        return y[:, 0], y[:, 1] / np.asarray(self.profile.rho(z))


def default_region(profile: ShearProfile, k: float):
    """Re s in [-k max|U|, k max|U|] minus |Re s| < 1e-4; Im s within k max|U| + 1."""
    z = np.linspace(0.0, profile.L, 2001)
    umax = float(np.max(np.abs(profile.U(z))))
    x = abs(k) * umax
    y = x + 1.0
    if x <= RE_BUFFER:
        return []
    return [(RE_BUFFER, x, -y, y), (-x, -RE_BUFFER, -y, y)]


def rayleigh_identity_residuals(profile: ShearProfile, pair: ChannelEigenpair) -> dict:
    """Normalized residuals of Rayleigh's identity and of its imaginary part."""
    z, u, du, k, s = pair.z, pair.u_z, pair.du_z, pair.k, pair.s
    gam = s + 1j * k * profile.U(z)
    upp = profile.U_second(z) * np.ones_like(z)
    first = quad_weighted(np.abs(du) ** 2 + k * k * np.abs(u) ** 2, z)
    third = quad_weighted(1j * k * upp / gam * np.abs(u) ** 2, z)
    sign_rel = quad_weighted(upp / np.abs(gam) ** 2 * np.abs(u) ** 2, z)
    sign_den = quad_weighted(np.abs(upp) / np.abs(gam) ** 2 * np.abs(u) ** 2, z)
    return {"rayleigh": float(abs(first + third) / first),
            "sign_relation": float(abs(sign_rel) / sign_den) if sign_den > 0 else 0.0}


# Winding verification budget. Near the imaginary axis, where a critical layer
# approaches a wall with U' -> 0, the mismatch oscillates too fast to certify
# cheaply; such cells are reported as inconclusive instead.
VERIFY_DEPTH = 1
VERIFY_POINTS = 512


STRIP_FRACTION = 0.1


def _split_axis_strip(rect, n_seeds):
    """Cut off the tenth of ``rect`` nearest Re(s) = 0, so that the bulk can be
    verified separately from the hard strip next to the continuous spectrum."""
    x0, x1, y0, y1 = rect
    nx, ny = n_seeds
    w = STRIP_FRACTION * (x1 - x0)
    if x0 >= 0:
        strip, bulk = (x0, x0 + w, y0, y1), (x0 + w, x1, y0, y1)
    else:
        strip, bulk = (x1 - w, x1, y0, y1), (x0, x1 - w, y0, y1)
    return [(bulk, (nx, ny)), (strip, (max(nx // 8, 3), ny))]


def _complex_search(problem, profile, k, region, n_seeds, tag, accept, residual_tol):
    rects = default_region(profile, k) if region is None else list(region)
    miss = problem.miss_function()
    z = np.linspace(0.0, profile.L, 2001)
    pairs, rejected, inconclusive = [], [], []
    for rect in rects:
        for part, seeds in _split_axis_strip(rect, n_seeds):
            res = find_complex_roots(miss, part, n_seeds=seeds, max_depth=VERIFY_DEPTH,
                                     max_points=VERIFY_POINTS)
            inconclusive += res.inconclusive_cells
            for root in res.roots:
                u, du = problem.solution(root.root, z)
                u, du = _normalize(u, du)
                pair = ChannelEigenpair(s=complex(root.root), k=k, z=z, u_z=u, du_z=du, residual=np.nan,
                                        equation_tag=tag,
                                        diagnostics={"winding_verified": root.winding_verified,
                                                     "miss_residual": root.residual})
                if any(abs(pair.s - q.s) <= 1e-8 * max(1.0, abs(q.s)) for q in pairs):
                    continue  # found from both sides of the strip boundary
                ok, why = accept(pair)
                if ok and pair.residual <= residual_tol:
                    pairs.append(pair)
                else:
                    rejected.append((pair.s, why or f"identity residual {pair.residual:.2e}"))
    pairs.sort(key=lambda e: (-e.s.real, e.s.imag))
    return ChannelSearch(eigenpairs=pairs, region=tuple(rects), inconclusive=inconclusive,
                         rejected=rejected)


def rayleigh_eigensolve(profile: ShearProfile, k: float, region=None, n_seeds=(41, 41),
                        tol: float = 1e-10, residual_tol: float = 1e-6) -> ChannelSearch:
    """-u'' + k^2 u + (i k U''/gamma) u = 0, gamma = s + i k U (density ignored)."""
    pointwise = None
    if profile.pointwise is not None:
        pointwise = lambda z: profile.pointwise(z)[:3] + (1.0, 0.0)
    homog = ShearProfile(profile.U, profile.U_prime, profile.U_second,
                         lambda z: np.ones_like(np.asarray(z, dtype=float)),
                         lambda z: np.zeros_like(np.asarray(z, dtype=float)), g=0.0, L=profile.L,
                         pointwise=pointwise)
    problem = ChannelProblem(homog, k, tol=tol)

    def accept(pair):
        r = rayleigh_identity_residuals(homog, pair)
        pair.residual = r["rayleigh"]
        pair.diagnostics.update(r)
        if r["sign_relation"] > residual_tol:
            return False, f"sign relation residual {r['sign_relation']:.2e}"
        return True, ""
    return _complex_search(problem, homog, k, region, n_seeds, "rayleigh", accept, residual_tol)


def taylor_goldstein_eigensolve(profile: ShearProfile, k: float, region=None, n_seeds=(41, 41),
                                tol: float = 1e-10, residual_tol: float = 1e-6) -> ChannelSearch:
    """-(rho u')' + k^2 rho u + (i k/gamma)(rho U')' u - (k^2 g/gamma^2) rho' u = 0."""
    from .criteria import howard_substitution_residual
    problem = ChannelProblem(profile, k, tol=tol)

    def accept(pair):
        res, crossed = howard_substitution_residual(pair, profile, return_flag=True)
        pair.residual = res
        pair.diagnostics["branch_crossing"] = crossed
        return True, ""
    return _complex_search(problem, profile, k, region, n_seeds, "taylor_goldstein", accept, residual_tol)
