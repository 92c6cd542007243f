import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import CubicSpline

from vortexspec.numerics.fd import (dense_linear_eig, fd_generalized_eig, radial_axi_pencil,
                                    richardson_extrapolate, twod_vortex_matrices)
from vortexspec.profiles import make_builtin
from vortexspec.vortex import (FourierMode, RadialProblem, SpectralParam, ab_from_s,
                               axisymmetric_eigensolve, count_nodes, divergence_free_forcing,
                               eigen_search_complex, exclusion_bound_M, howard_identity_residuals,
                               kelvin_modes_smooth, planted_zero_problem, resolvent_probe,
                               richardson_number, s_from_ab, spectrum_scan, twod_eigensolve)

LAMB = make_builtin("lamb_oseen")
SHIELDED = make_builtin("shielded_gaussian")


@pytest.fixture(scope="module")
def lamb_kelvin():
    return kelvin_modes_smooth(LAMB, FourierMode(2, 1.0), count=3, negative=False)


# --- modes and parametrization -----------------------------------------------------------


def test_fourier_mode_validation():
    with pytest.raises(ValueError):
        FourierMode(0, 0.0)
    with pytest.raises(ValueError):
        FourierMode(1.5, 1.0)
    assert FourierMode(2, 1).conjugate() == FourierMode(-2, -1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(-4, 4).filter(lambda m: m != 0), st.floats(-5, 5), st.floats(-5, 5))
def test_ab_parametrization_round_trip(m, a, b):
    s = s_from_ab(m, a, b)
    a2, b2 = ab_from_s(m, s)
    assert a2 == pytest.approx(a, abs=1e-12) and b2 == pytest.approx(b, abs=1e-12)
    p = SpectralParam.from_ab(m, a, b)
    assert p.a == pytest.approx(a, abs=1e-12) and p.b == pytest.approx(b, abs=1e-12)
    # gamma = i m gamma_star
    om = 0.37
    assert p.gamma(om) == pytest.approx(1j * m * p.gamma_star(om), abs=1e-12)


# --- radial problem and Kelvin modes ---------------------------------------------------------


def test_kelvin_modes_node_count(lamb_kelvin):
    sols = lamb_kelvin.upper
    assert [count_nodes(s.u_r, s.grid) for s in sols] == [0, 1, 2]
    for sol in sols:
        assert sol.a == 0.0 or abs(sol.a) < 1e-14
        assert sol.boundary_decay > 0
        # decay toward the outer boundary
        assert abs(sol.u_r[-1]) < 1e-6 * np.max(np.abs(sol.u_r))


def test_kelvin_mode_satisfies_momentum_equations(lamb_kelvin):
    sol = lamb_kelvin.upper[0]
    m, k, s, r = 2, 1.0, sol.s, sol.grid
    d = lambda y: CubicSpline(r, y)(r, 1)
    g = s + 1j * m * LAMB.omega(r)
    sl = (r > 0.05) & (r < 8.0)
    scale = np.max(np.abs(sol.u_r))
    eqs = [g * sol.u_r - 2 * LAMB.omega(r) * sol.u_theta + d(sol.p),
           g * sol.u_theta + LAMB.vorticity(r) * sol.u_r + 1j * m / r * sol.p,
           g * sol.u_z + 1j * k * sol.p,
           d(r * sol.u_r) / r + 1j * m / r * sol.u_theta + 1j * k * sol.u_z]
    for e in eqs:
        assert np.max(np.abs(e[sl])) < 1e-4 * scale


def test_kelvin_modes_other_profile():
    res = kelvin_modes_smooth(make_builtin("kaufmann_scully"), FourierMode(1, 0.5), count=3)
    b = res.b_values
    assert len(b) == 3 and np.all(np.diff(b) < 0) and np.all((b > 1) & (b <= 3))
    for sol in res.upper:
        assert howard_identity_residuals(sol, make_builtin("kaufmann_scully"))["hg0"] < 1e-6


def test_miss_is_real_on_the_neutral_line():
    prob = RadialProblem(LAMB, FourierMode(2, 1.0))
    vals = prob.miss(-2j * np.array([1.1, 1.3, 1.7]))
    assert np.all(np.abs(vals.imag) <= 1e-10 * np.abs(vals))


def test_identity_residuals_detect_a_wrong_eigenvalue(lamb_kelvin):
    sol = lamb_kelvin.upper[0]
    prob = RadialProblem(LAMB, FourierMode(2, 1.0))
    off = prob.solve(sol.s - 0.05j)
    assert howard_identity_residuals(sol, LAMB)["hg0"] < 1e-6
    assert howard_identity_residuals(off, LAMB)["hg0"] > 1e-3


# --- axisymmetric and two-dimensional modes -----------------------------------------------------


def test_axisymmetric_modes_against_fd_oracle():
    res = axisymmetric_eigensolve(SHIELDED, 1.0)
    s = res.eigenvalues
    assert np.all(s.imag == 0)
    top = s.real.max()
    vals = []
    for n in (400, 800):
        K, M, _ = radial_axi_pencil(SHIELDED.phi, 1.0, 20.0, n)
        vals.append(np.sqrt(fd_generalized_eig(K, M).values.max()))
    assert top == pytest.approx(richardson_extrapolate(*vals), rel=1e-5)
    assert sorted(sol.diagnostics["nodes"] for sol in res.solutions if sol.s.real > 0)[:3] == [0, 1, 2]


def test_axisymmetric_stable_when_rayleigh_function_positive():
    res = axisymmetric_eigensolve(LAMB, 1.0)
    assert len(res) == 0 and res.excluded_note


def test_twod_mode_against_fd_oracle():
    a_guess, b_guess = 0.0111, 0.1348
    res = twod_eigensolve(SHIELDED, 2, region=[(0.005, 0.05, 0.1, 0.2)])
    assert len(res) == 1
    A, B, _ = twod_vortex_matrices(SHIELDED.omega, SHIELDED.vorticity_prime, 2, 15.0, 600)
    ev = dense_linear_eig(A, B)
    oracle = ev[np.argmax(ev.real)]
    assert abs(res.eigenvalues[0] - oracle) < 1e-4
    a, b = ab_from_s(2, res.eigenvalues[0])
    assert a == pytest.approx(a_guess, abs=1e-3) and b == pytest.approx(b_guess, abs=1e-3)


def test_twod_skips_monotone_vorticity():
    res = twod_eigensolve(LAMB, 2)
    assert len(res) == 0 and "does not change sign" in res.excluded_note


def test_complex_search_trims_excluded_bands():
    res = eigen_search_complex(LAMB, FourierMode(1, 1.0), region=[(0.05, 0.5, -0.5, 1.5)],
                               n_seeds=(9, 9))
    assert len(res) == 0
    assert all(0.0 <= r[2] and r[3] <= 1.0 for r in res.region)


# --- exclusion bound and Richardson number ---------------------------------------------------


def test_exclusion_bound_against_brute_force():
    mode = FourierMode(2, 1.0)
    bound = exclusion_bound_M(LAMB, mode)
    r = np.linspace(1e-4, 30.0, 300001)
    q = 4 + r * r
    w, wp = LAMB.vorticity(r), LAMB.vorticity_prime(r)
    s1 = np.max(4 * np.abs(r * (wp / q - 2 * r * w / q ** 2)))
    s2 = np.max(r * r / q * np.abs(LAMB.phi(r)))
    assert bound.S1 == pytest.approx(s1, rel=1e-6)
    assert bound.S2 == pytest.approx(s2, rel=1e-6)
    assert bound.M == pytest.approx(max(1.0, 2 * max(s1, s2)), rel=1e-6)


def test_exclusion_bound_makes_real_part_of_B_positive():
    mode = FourierMode(1, 0.5)
    M = exclusion_bound_M(LAMB, mode).M
    from vortexspec.vortex.identities import coefficient_B
    r = np.geomspace(1e-4, 30.0, 2000)
    for a in (1.01 * M, -1.01 * M, 3 * M):
        for b in np.linspace(-1, 2, 13):
            assert np.all(coefficient_B(LAMB, mode, a, b, r).real > 0)


def test_richardson_number_scaling():
    r = np.geomspace(0.1, 10, 20)
    ri1 = richardson_number(LAMB, FourierMode(1, 1.0), r)
    ri2 = richardson_number(LAMB, FourierMode(2, 3.0), r)
    assert np.allclose(ri2, ri1 * 9 / 4)
    with pytest.raises(ValueError):
        richardson_number(LAMB, FourierMode(0, 1.0), r)


# --- scans, planted zeros and the resolvent --------------------------------------------------


def test_planted_zero_is_found():
    mode = FourierMode(2, 1.0)
    target = complex(s_from_ab(2, 0.5, 0.4))
    problem, kappa = planted_zero_problem(LAMB, mode, target)
    assert abs(problem.miss(np.array([target]))[0]) < 1e-8 * abs(problem.miss(np.array([target + 0.1]))[0])
    rect = [(0.25, 0.75, 0.0, 0.6)]
    rep = spectrum_scan(LAMB, mode, rectangle=rect, resolution=(1, 1), problem=problem)
    assert rep.total_count == 1
    assert abs(rep.roots[0]["s"] - target) < 1e-8
    # the unperturbed problem has nothing there
    assert spectrum_scan(LAMB, mode, rectangle=rect, resolution=(1, 1)).total_count == 0


def test_scan_report_serializes():
    rep = spectrum_scan(LAMB, FourierMode(1, 1.0), rectangle=[(0.1, 0.5, 0.0, 0.5)], resolution=(1, 2))
    d = rep.to_dict()
    assert d["total_count"] == 0 and d["n_inconclusive"] == 0 and len(d["cells"]) == 2


def test_resolvent_manufactured_solution():
    mode = FourierMode(2, 1.0)
    s = 0.3 - 1.0j
    res = resolvent_probe(LAMB, mode, s)
    r = res.grid
    f = divergence_free_forcing(mode)(r)
    d = lambda y: CubicSpline(r, y)(r, 1)
    om, w = LAMB.omega(r), LAMB.vorticity(r)
    g = s + 2j * om
    eqs = [g * res.u_r - 2 * om * res.u_theta + d(res.p) - f[0],
           g * res.u_theta + w * res.u_r + 2j / r * res.p - f[1],
           g * res.u_z + 1j * res.p - f[2],
           d(r * res.u_r) / r + 2j / r * res.u_theta + 1j * res.u_z]
    sl = (r > 0.05) & (r < 10.0)
    for e in eqs:
        assert np.max(np.abs(e[sl])) < 1e-4
    assert np.isfinite(res.gain) and res.gain > 0


def test_resolvent_finite_on_a_vertical_line():
    mode = FourierMode(1, 1.0)
    gains = [resolvent_probe(LAMB, mode, complex(0.2, y)).gain for y in np.linspace(-3, 3, 7)]
    assert np.all(np.isfinite(gains))
    with pytest.raises(ValueError):
        resolvent_probe(LAMB, mode, -1.0j)
