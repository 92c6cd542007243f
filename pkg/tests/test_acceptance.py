"""Acceptance checks, one test per criterion.

Each test records a one-line measurement; the terminal summary prints a
PASS/FAIL line per criterion. Reference values come from closed forms or
independent oracles (scipy quadrature, finite differences, Bessel series).
"""
import time

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy import optimize

from vortexspec.numerics.fd import (radial_operator_tridiagonal, richardson_extrapolate,
                                    rt_fd_oracle, signed_eigenvalue)
from vortexspec.numerics.ode import integrate
from vortexspec.numerics.quadrature import quad_weighted
from vortexspec.numerics.roots import winding_number
from vortexspec.profiles import check_assumptions, make_builtin, total_circulation
from vortexspec.rankine import bessel_mod, dispersion_residual, kelvin_modes_rankine
from vortexspec.shear import (make_shear, rayleigh_eigensolve, rt_eigs_boussinesq,
                              squire_transform, taylor_goldstein_eigensolve)
from vortexspec.shear.criteria import tg_bracket
from vortexspec.vortex import (FourierMode, RadialProblem, howard_identity_residuals,
                               kelvin_modes_smooth, richardson_min, spectrum_scan)
from vortexspec.vortex.identities import hg0_im_bracket, hg1_integrand, hg_half_bracket

BUILTINS = ("rankine", "lamb_oseen", "kaufmann_scully")


def _closed_form_rt(n2, k, L, n):
    return -n2 * k * k / (k * k + (n * np.pi / L) ** 2)


# --- 1 -------------------------------------------------------------------------


def _reconstructed_omega(profile, r):
    """(1/r^2) int_0^r W s ds by adaptive quadrature, accumulated along r."""
    breaks = [rb for rb, _ in profile.breakpoints]
    f = lambda x: float(profile.vorticity(x)) * x
    out, total, left = np.empty_like(r), 0.0, 0.0
    for i, ri in enumerate(r):
        pts = [b for b in breaks if left < b < ri]
        total += sp_integrate.quad(f, left, ri, points=pts or None, epsabs=1e-15, epsrel=1e-13)[0]
        out[i], left = total / ri ** 2, ri
    return out


def test_criterion_01_profile_identities(record):
    r = np.geomspace(1e-3, 30.0, 500)
    worst_w = worst_rep = worst_gamma = 0.0
    elapsed = 0.0
    for kind in BUILTINS:
        t0 = time.perf_counter()
        p = make_builtin(kind)
        om, omp, w = p.omega(r), p.omega_prime(r), p.vorticity(r)
        gamma = total_circulation(p)
        elapsed += time.perf_counter() - t0
        worst_w = max(worst_w, np.max(np.abs(w - (r * omp + 2 * om))))
        worst_rep = max(worst_rep, np.max(np.abs(om - _reconstructed_omega(p, r))))
        gamma_ref = sp_integrate.quad(lambda x: float(p.vorticity(x)) * x, 0, np.inf,
                                      points=None, limit=200)[0] if p.is_smooth else (
            sp_integrate.quad(lambda x: float(p.vorticity(x)) * x, 0, 1.0)[0])
        worst_gamma = max(worst_gamma, abs(gamma - 1.0), abs(gamma_ref - 1.0))
    record(1, f"W-consistency {worst_w:.1e}, reconstruction {worst_rep:.1e}, "
              f"|Gamma-1| {worst_gamma:.1e}, solver time {elapsed:.2f} s")
    assert worst_w <= 1e-10
    assert worst_rep <= 1e-10
    assert worst_gamma <= 1e-8
    assert elapsed < 1.0


# --- 2 -------------------------------------------------------------------------


def test_criterion_02_assumption_certification(record):
    t0 = time.perf_counter()
    reports = {kind: check_assumptions(make_builtin(kind)) for kind in BUILTINS}
    elapsed = time.perf_counter() - t0
    flags = {k: (v.h1_holds, v.h2_holds) for k, v in reports.items()}
    record(2, f"(H1, H2): {flags}, {elapsed:.2f} s")
    assert reports["lamb_oseen"].h1_holds and reports["lamb_oseen"].h2_holds
    assert reports["kaufmann_scully"].h1_holds and reports["kaufmann_scully"].h2_holds
    assert not reports["rankine"].h1_holds
    assert elapsed < 1.0


# --- 3 -------------------------------------------------------------------------


def test_criterion_03_rayleigh_taylor_closed_form(record):
    L, n2 = 1.0, 1.0
    profile = make_shear("zero", "exponential", L=L, g=1.0, density_params={"alpha": n2})
    worst, orders = 0.0, []
    t0 = time.perf_counter()
    for k in (0.5, 1.0, 2.0):
        res = rt_eigs_boussinesq(profile, k, n_max=5)
        neutral = [p.s for p in res.eigenpairs if abs(p.s.real) == 0.0]
        assert len(neutral) >= 5
        for n, s in enumerate(neutral[:5], start=1):
            exact = _closed_form_rt(n2, k, L, n)
            worst = max(worst, abs((s * s).real - exact) / abs(exact))
    elapsed = time.perf_counter() - t0
    # the finite-difference oracle converges at second order
    k = 1.0
    exact = np.array([_closed_form_rt(n2, k, L, n) for n in range(1, 4)])
    errs = []
    for n_grid in (200, 400):
        nu = rt_fd_oracle(None, None, 1.0, k, L, n=n_grid,
                          boussinesq_n2=lambda z: n2 * np.ones_like(z))
        errs.append(np.abs(nu[:3] - exact))
    orders = np.log2(errs[0] / errs[1])
    record(3, f"max rel err {worst:.1e}, FD orders {np.round(orders, 2).tolist()}, {elapsed:.2f} s")
    assert worst <= 1e-6
    assert np.all(np.abs(orders - 2.0) < 0.1)
    assert elapsed < 5.0


# --- 4 -------------------------------------------------------------------------


def test_criterion_04_unstable_stratification(record):
    L, k = 1.0, 1.0
    profile = make_shear("zero", "exponential", L=L, g=1.0, density_params={"alpha": -1.0})
    t0 = time.perf_counter()
    res = rt_eigs_boussinesq(profile, k, n_max=5)
    elapsed = time.perf_counter() - t0
    growth = [p.s.real for p in res.eigenpairs if p.s.imag == 0.0 and p.s.real > 0]
    exact = [np.sqrt(_closed_form_rt(-1.0, k, L, n)) for n in range(1, len(growth) + 1)]
    err = max(abs(g - e) / e for g, e in zip(growth, exact)) if growth else np.inf
    record(4, f"{len(growth)} growth rates {np.round(growth, 6).tolist()}, max rel err {err:.1e}, "
              f"{elapsed:.2f} s")
    assert len(growth) >= 3
    assert np.all(np.diff(growth) < 0)
    assert err <= 1e-6
    assert elapsed < 5.0


# --- 5 -------------------------------------------------------------------------


def test_criterion_05_inflection_filter(record):
    t0 = time.perf_counter()
    poiseuille = rayleigh_eigensolve(make_shear("poiseuille", L=1.0), 1.0)
    kolmo = rayleigh_eigensolve(make_shear("kolmogorov", L=2 * np.pi), 0.5)
    short = rayleigh_eigensolve(make_shear("kolmogorov", L=3.0), 0.5)
    elapsed = time.perf_counter() - t0
    growing = [p for p in kolmo.eigenpairs if p.s.real > 0]
    verified = [p for p in growing if p.diagnostics.get("winding_verified")]
    record(5, f"poiseuille {len(poiseuille.eigenpairs)} roots, kolmogorov 2pi "
              f"{[complex(np.round(p.s, 6)) for p in growing]} (verified {len(verified)}), "
              f"L=3 {len(short.eigenpairs)} roots, {elapsed:.1f} s")
    assert poiseuille.eigenpairs == []
    assert len(verified) >= 1
    assert short.eigenpairs == []
    assert elapsed < 60.0


# --- 6 -------------------------------------------------------------------------


def test_criterion_06_miles_howard(record):
    profile = make_shear("tanh", "tanh", L=4.0, g=1.0, density_params={"delta": 0.4})
    z = np.linspace(0.0, 4.0, 4001)
    ri_min = float(np.min(profile.richardson(z)))
    t0 = time.perf_counter()
    res = taylor_goldstein_eigensolve(profile, 0.5)
    elapsed = time.perf_counter() - t0
    rng = np.random.default_rng(6)
    s_samples = rng.uniform(-1, 1, 50) + 1j * rng.uniform(-1.5, 1.5, 50)
    bracket_min = min(float(np.min(tg_bracket(profile, 0.5, s, z))) for s in s_samples)
    record(6, f"min Ri {ri_min:.3f}, {len(res.eigenpairs)} eigenvalues, "
              f"{len(res.inconclusive)} inconclusive cells, min bracket {bracket_min:.2e}, {elapsed:.1f} s")
    assert ri_min >= 0.25
    assert res.eigenpairs == []
    assert bracket_min >= 0.0
    assert elapsed < 60.0


# --- 7 -------------------------------------------------------------------------


def test_criterion_07_squire(record):
    rng = np.random.default_rng(7)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        k1 = rng.uniform(0.1, 3) * rng.choice([-1, 1])
        k2 = rng.uniform(-3, 3)
        sigma = complex(rng.normal(), rng.normal())
        g = rng.uniform(0, 10)
        mode = squire_transform(k1, k2, sigma, g)
        k = np.sqrt(k1 * k1 + k2 * k2)
        checks = [abs(mode.k - k) / k,
                  abs(mode.amplification - k / k1) / abs(k / k1),
                  abs(mode.s - sigma * k / k1) / abs(sigma * k / k1),
                  abs(mode.g_equiv - g * k * k / (k1 * k1)) / max(g * k * k / (k1 * k1), 1e-300),
                  abs(mode.k ** 2 - k1 * k1 - k2 * k2) / k ** 2]
        worst = max(worst, *checks)
    elapsed = time.perf_counter() - t0
    record(7, f"max relative deviation {worst:.1e} over 100 inputs, {elapsed:.3f} s")
    assert worst <= 4 * np.finfo(float).eps
    assert elapsed < 1.0


# --- 8 -------------------------------------------------------------------------


def _shooting_b(profile, m, k, b_guess, width):
    problem = RadialProblem(profile, FourierMode(m, k))
    f = lambda b: problem.miss(np.array([-1j * m * b]))[0].real
    return optimize.brentq(f, b_guess - width, b_guess + width, xtol=1e-13)


def test_criterion_08_rankine_kelvin(record):
    rankine = make_builtin("rankine")
    worst_res = worst_cross = 0.0
    counts = []
    t_solve = 0.0
    t0 = time.perf_counter()
    for m, k in ((1, 1.0), (2, 1.0), (2, 2.0)):
        t1 = time.perf_counter()
        res = kelvin_modes_rankine(m, k, count=5)
        t_solve += time.perf_counter() - t1
        counts.append((len(res["upper"]), len(res["lower"])))
        for branch in ("upper", "lower"):
            roots = res[branch]
            assert len(roots) >= 3
            b = np.array([r.b for r in roots])
            assert np.all(np.abs(b - 1) <= 2.0 / m)
            # monotone toward the accumulation point
            assert np.all(np.diff(np.abs(b - 1)) < 0)
            for r in roots:
                worst_res = max(worst_res, abs(dispersion_residual(m, k, r.b)))
            # the general shooting solver on the same profile
            for r in roots[:3]:
                gap = 0.2 * abs(roots[1].b - roots[2].b)
                worst_cross = max(worst_cross, abs(_shooting_b(rankine, m, k, r.b, gap) - r.b))
    elapsed = time.perf_counter() - t0
    record(8, f"roots per (m,k) {counts}, max residual {worst_res:.1e}, "
              f"shooting agreement {worst_cross:.1e}, {elapsed:.1f} s")
    assert worst_res <= 1e-10
    assert worst_cross <= 1e-6
    assert elapsed < 30.0


# --- 9 -------------------------------------------------------------------------


def _fd_kelvin_b(profile, m, k, index, lo, hi, n_grid, R=30.0):
    """b where the index-th eigenvalue of the real operator crosses zero."""
    A = lambda r: r * r / (m * m + k * k * r * r)

    def lam(b):
        def B(r):
            q = m * m + k * k * r * r
            g = profile.omega(r) - b
            dw = profile.vorticity_prime(r) / q - 2 * k * k * r * profile.vorticity(r) / q ** 2
            return 1 + r * dw / g - (k * k / (m * m)) * (r * r / q) * profile.phi(r) / g ** 2
        main, off, _ = radial_operator_tridiagonal(A, B, R, n_grid)
        return signed_eigenvalue(main, off, index)
    return optimize.brentq(lam, lo, hi, xtol=1e-13)


def test_criterion_09_smooth_kelvin(record):
    profile = make_builtin("lamb_oseen")
    m, k = 2, 1.0
    t0 = time.perf_counter()
    res = kelvin_modes_smooth(profile, FourierMode(m, k), count=4, negative=False)
    elapsed = time.perf_counter() - t0
    b = res.b_values
    assert len(b) >= 3
    assert np.all((b > 1) & (b <= 2))
    assert np.all(np.diff(b) < 0)
    worst = 0.0
    for n in range(3):
        gap = 0.3 * (b[n] - b[n + 1])
        est = [_fd_kelvin_b(profile, m, k, n, b[n] - gap, b[n] + gap, N) for N in (3000, 6000)]
        worst = max(worst, abs(richardson_extrapolate(*est) - b[n]))
    record(9, f"b = {np.round(b[:3], 8).tolist()}, FD oracle agreement {worst:.1e}, {elapsed:.1f} s")
    assert worst <= 1e-5
    assert elapsed < 30.0


# --- 10 ------------------------------------------------------------------------


def test_criterion_10_richardson_exactness(record):
    rng = np.random.default_rng(10)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(20):
        eps = rng.uniform(0.1, 5.0)
        m = int(rng.integers(1, 6))
        k = rng.uniform(0.1, 3.0)
        got = richardson_min(make_builtin("scaled_kaufmann_scully", eps=eps), FourierMode(m, k))
        exact = k * k / (m * m * eps)
        worst = max(worst, abs(got - exact))
    m, k = 2, 0.7
    quarter = richardson_min(make_builtin("scaled_kaufmann_scully", eps=4 * k * k / (m * m)),
                             FourierMode(m, k))
    elapsed = time.perf_counter() - t0
    record(10, f"max |Ri_min - k^2/(m^2 eps)| {worst:.1e}, Ri at eps=4k^2/m^2: {quarter:.15f}, "
               f"{elapsed:.2f} s")
    assert worst <= 1e-8
    assert abs(quarter - 0.25) <= 1e-8
    assert elapsed < 1.0


# --- 11 ------------------------------------------------------------------------


def test_criterion_11_spectral_exclusion(record):
    counts = {}
    t0 = time.perf_counter()
    for kind in ("lamb_oseen", "kaufmann_scully"):
        profile = make_builtin(kind)
        for m in (1, 2):
            for k in (0.5, 1.0):
                rep = spectrum_scan(profile, FourierMode(m, k))
                counts[(kind, m, k)] = (rep.total_count, len(rep.inconclusive),
                                        [c.count for c in rep.cells])
    elapsed = time.perf_counter() - t0
    total = sum(c[0] for c in counts.values())
    n_bad = sum(c[1] for c in counts.values())
    record(11, f"total winding count {total}, inconclusive cells {n_bad}, "
               f"{sum(len(c[2]) for c in counts.values())} cells, {elapsed:.0f} s")
    for key, (_, _, cell_counts) in counts.items():
        assert all(c == 0 for c in cell_counts), key
    assert elapsed < 600.0


# --- 12 ------------------------------------------------------------------------


def _random_test_function(rng, r, m):
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    width = rng.uniform(0.5, 3.0)
    return r ** abs(m) * np.exp(-(r / width) ** 2) * (c[0] + c[1] * r + c[2] * r * r)


def test_criterion_12_howard_identities(record):
    worst = 0.0
    t0 = time.perf_counter()
    n_pairs = 0
    for kind in ("lamb_oseen", "kaufmann_scully"):
        profile = make_builtin(kind)
        for m, k in ((1, 1.0), (2, 1.0)):
            res = kelvin_modes_smooth(profile, FourierMode(m, k), count=3)
            for sol in res.upper + res.negative:
                vals = howard_identity_residuals(sol, profile)
                worst = max(worst, vals["hg0"], vals["hg0_im"], vals["hg1"], vals["hg_half"])
                n_pairs += 1
    # sign structure on random test functions
    rng = np.random.default_rng(12)
    r = np.geomspace(1e-4, 30.0, 3000)
    lamb = make_builtin("lamb_oseen")
    n_ok = 0
    for _ in range(100):
        m = int(rng.integers(1, 4))
        k = rng.uniform(0.2, 2.0)
        mode = FourierMode(m, k)
        a = rng.uniform(0.01, 1.0) * rng.choice([-1, 1])
        u, ustar = _random_test_function(rng, r, m), _random_test_function(rng, r, m)
        # b <= 0: the imaginary-part bracket is nonpositive (negative wherever W > 0)
        b_low = -rng.uniform(0.0, 2.0)
        im_bracket = hg0_im_bracket(lamb, mode, a, b_low, r)
        im_int = quad_weighted(im_bracket * np.abs(u) ** 2 * r, r)
        # b >= 1: the integrand for u / gamma_star is positive everywhere
        b_high = 1.0 + rng.uniform(0.0, 2.0)
        f1 = hg1_integrand(lamb, mode, a, b_high, r, u, ustar)
        # Ri >= 1/4 makes the indefinite part of the half-power identity nonnegative
        eps = rng.uniform(0.2, 1.0) * 4 * k * k / (m * m)
        half = hg_half_bracket(make_builtin("scaled_kaufmann_scully", eps=eps), mode, a,
                               rng.uniform(-1, 2), r)
        ok = (np.all(im_bracket <= 0) and im_int < 0 and np.all(f1 >= 0)
              and quad_weighted(f1, r) > 0 and np.all(half >= -1e-14))
        n_ok += bool(ok)
    elapsed = time.perf_counter() - t0
    record(12, f"max identity residual {worst:.1e} over {n_pairs} eigenpairs, "
               f"sign structure {n_ok}/100, {elapsed:.1f} s")
    assert n_pairs >= 12
    assert worst <= 1e-6
    assert n_ok == 100
    assert elapsed < 30.0


# --- 13 ------------------------------------------------------------------------


def _fixed_step_error(n_steps):
    """Global error of n equal steps for u'' = -u over [0, 2]."""
    rhs = lambda r, y: np.array([y[1], -y[0]])
    h = 2.0 / n_steps
    y = np.array([0.0, 1.0], dtype=complex)
    for i in range(n_steps):
        # a huge tolerance accepts every step at its first size
        y = integrate(rhs, i * h, (i + 1) * h, y, tol=1e10, atol=1e10, first_step=h).y
    return abs(y[0] - np.sin(2.0))


def test_criterion_13_numerics_engine(record):
    t0 = time.perf_counter()
    errs = [_fixed_step_error(n) for n in (8, 16, 32)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    worst_w = 0.0
    for m in range(6):
        for x in np.linspace(0.1, 20.0, 200):
            pair = bessel_mod(m, x)
            worst_w = max(worst_w, abs(pair.wronskian + 1.0 / x) * x)
    raws = []
    for zeros in ([0.3 + 0.2j], [0.1j, -0.4 + 0.3j, 0.5 - 0.5j], []):
        f = lambda z, zs=zeros: np.exp(z) * np.prod([z - z0 for z0 in zs], axis=0) if zs else np.exp(z)
        w = winding_number(f, (-1, 1, -1, 1))
        assert w.reliable and w.count == len(zeros)
        raws.append(abs(w.raw - w.count))
    elapsed = time.perf_counter() - t0
    record(13, f"observed orders {np.round(orders, 2).tolist()}, Wronskian rel {worst_w:.1e}, "
               f"winding |raw - count| {max(raws):.1e}, {elapsed:.2f} s")
    assert np.all(orders >= 4.5)
    assert worst_w <= 1e-12
    assert max(raws) <= 1e-6
    assert elapsed < 10.0
