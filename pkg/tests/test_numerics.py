import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexspec.numerics.fd import (channel_pencil, fd_generalized_eig, radial_axi_pencil,
                                    radial_operator_tridiagonal, richardson_extrapolate,
                                    signed_eigenvalue)
from vortexspec.numerics.ode import IntegrationError, OdeSystem, integrate
from vortexspec.numerics.quadrature import quad_weighted
from vortexspec.numerics.roots import (MissFunction, find_complex_roots, find_real_roots, muller,
                                       refine_brackets, winding_number)
from vortexspec.numerics.shooting import ShootingProblem, shoot_profiles, shoot_two_sided


def oscillator(r, y):
    return np.array([y[1], -y[0]])


# --- integrator ------------------------------------------------------------------


@pytest.mark.parametrize("tol", [1e-6, 1e-9, 1e-12])
def test_integrator_meets_tolerance(tol):
    res = integrate(oscillator, 0.0, 10.0, [0.0, 1.0], tol=tol)
    err = abs(res.y[0] - np.sin(10.0))
    # global error stays within a modest multiple of the local tolerance
    assert err < 1e3 * tol


def test_integrator_backward_and_system_wrapper():
    system = OdeSystem(rhs=lambda r, y: y, dimension=1)
    res = integrate(system, 1.0, 0.0, [np.e], tol=1e-12)
    assert res.y[0] == pytest.approx(1.0, rel=1e-10)
    assert res.r_end == 0.0


def test_dense_output_is_accurate():
    r_eval = np.linspace(0.0, 6.0, 61)
    res = integrate(oscillator, 0.0, 6.0, [0.0, 1.0], tol=1e-11, r_eval=r_eval)
    assert np.max(np.abs(res.y_eval[:, 0] - np.sin(r_eval))) < 1e-8


def test_dense_output_order_is_checked():
    with pytest.raises(ValueError):
        integrate(oscillator, 0.0, 1.0, [0.0, 1.0], r_eval=[0.5, 0.2])


def test_batched_states_integrate_independently():
    lam = np.array([1.0, 2.0, -1.0])
    res = integrate(lambda r, y: lam * y, 0.0, 1.0, np.ones((1, 3))[0], tol=1e-12)
    assert np.allclose(res.y, np.exp(lam), rtol=1e-10)


def test_complex_states():
    res = integrate(lambda r, y: 1j * y, 0.0, np.pi, [1.0 + 0j], tol=1e-12)
    assert res.y[0] == pytest.approx(-1.0, abs=1e-10)


def test_singularity_raises():
    with pytest.raises(IntegrationError):
        integrate(lambda r, y: y ** 2, 0.0, 2.0, [1.0], tol=1e-10)


def test_trace_records_steps():
    res = integrate(oscillator, 0.0, 1.0, [0.0, 1.0], trace=True)
    assert res.trace_r[0] == 0.0 and res.trace_r[-1] == 1.0
    assert len(res.trace_r) == res.n_steps + 1


# --- quadrature ------------------------------------------------------------------


def test_quadrature_weights():
    x = np.linspace(0.0, 1.0, 201)
    assert quad_weighted(x ** 2, x) == pytest.approx(1 / 3, rel=1e-12)
    assert quad_weighted(x ** 2, x, weight="r") == pytest.approx(1 / 4, rel=1e-10)
    assert quad_weighted(np.exp(1j * x), x) == pytest.approx((np.exp(1j) - 1) / 1j, rel=1e-10)


def test_quadrature_nonuniform_and_errors():
    x = np.geomspace(1e-3, 10.0, 2001)
    assert quad_weighted(np.exp(-x), x) == pytest.approx(np.exp(-1e-3) - np.exp(-10), rel=1e-9)
    with pytest.raises(ValueError):
        quad_weighted([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        quad_weighted(x, x, weight="r2")


# --- real and complex roots --------------------------------------------------------


def test_real_roots_reject_poles():
    res = find_real_roots(np.tan, (0.1, 7.0), scan_step=0.01)
    assert np.allclose(res.values, [np.pi, 2 * np.pi], atol=1e-12)
    assert np.allclose(res.poles, [np.pi / 2, 3 * np.pi / 2], atol=1e-8)


def test_real_roots_truncation():
    res = find_real_roots(np.sin, (0.5, 20.0), max_roots=2)
    assert np.allclose(res.values, [np.pi, 2 * np.pi])
    assert res.truncated


def test_refine_brackets_vectorized():
    x, res = refine_brackets(np.sin, np.array([3.0, 6.0, 9.0]), np.array([4.0, 7.0, 10.0]))
    assert np.allclose(x, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-12)
    assert np.all(res < 1e-12)
    with pytest.raises(ValueError):
        refine_brackets(np.sin, np.array([1.0]), np.array([2.0]))


def test_muller_finds_complex_roots():
    z, res, ok = muller(lambda z: z ** 2 + 1, np.array([0.5 + 0.5j, -0.5 - 0.5j]))
    assert ok.all()
    assert np.allclose(sorted(z, key=lambda c: c.imag), [-1j, 1j], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9)), min_size=0, max_size=4))
def test_winding_counts_planted_zeros(pts):
    zeros = [complex(x, y) for x, y in pts]
    f = lambda z: np.exp(0.3 * z) * np.prod([z - z0 for z0 in zeros], axis=0) if zeros else np.exp(0.3 * z)
    w = winding_number(f, (-1.0, 1.0, -1.0, 1.0))
    assert w.reliable
    assert w.count == len(zeros)
    assert abs(w.raw - w.count) < 1e-6


def test_winding_flags_zero_on_contour():
    w = winding_number(lambda z: z - 1.0, (-1.0, 1.0, -1.0, 1.0))
    assert not w.reliable


def test_winding_counts_poles_negatively():
    w = winding_number(lambda z: 1.0 / (z - 0.2j), (-1.0, 1.0, -1.0, 1.0))
    assert w.reliable and w.count == -1


def test_complex_roots_polynomial():
    roots = np.array([0.3 + 0.4j, -0.6 - 0.1j, 0.7 - 0.7j])
    f = lambda z: np.prod([z - r for r in roots], axis=0)
    res = find_complex_roots(MissFunction(f), (-1.0, 1.0, -1.0, 1.0), n_seeds=(21, 21))
    found = sorted(res.values, key=lambda c: (c.real, c.imag))
    assert np.allclose(found, sorted(roots, key=lambda c: (c.real, c.imag)), atol=1e-10)
    assert all(r.winding_verified for r in res.roots)
    assert res.inconclusive_cells == []


def test_miss_function_scalar_wrapper():
    f = MissFunction.scalar(lambda z: z * z)
    assert f(2.0) == 4.0
    assert np.allclose(f(np.array([1j, 2.0])), [-1.0, 4.0])


# --- shooting ------------------------------------------------------------------------


def _string_problem():
    # u'' + lam u = 0, u(0) = u(1) = 0: lam = (n pi)^2
    rhs = lambda r, y, lam: np.array([y[1], -lam * y[0]])
    start = lambda lam: np.array([np.zeros_like(lam), np.ones_like(lam)], dtype=complex)
    return ShootingProblem(rhs, start, start)


def test_shooting_mismatch_vanishes_at_eigenvalues():
    prob = _string_problem()
    for n in (1, 2, 3):
        lam = np.array([(n * np.pi) ** 2], dtype=complex)
        assert abs(shoot_two_sided(prob, lam, 0.0, 0.37, 1.0, tol=1e-12)[0]) < 1e-8
    miss = shoot_two_sided(prob, np.array([5.0 + 0j]), 0.0, 0.37, 1.0)
    assert abs(miss[0]) > 0.1


def test_shooting_jump_condition():
    # u'' = 0 with a flux jump p u at r = 0.5: solutions are piecewise linear
    rhs = lambda r, y, p: np.array([y[1], np.zeros_like(y[0])])
    left = lambda p: np.array([np.zeros_like(p), np.ones_like(p)], dtype=complex)
    right = lambda p: np.array([np.zeros_like(p), np.ones_like(p)], dtype=complex)
    prob = ShootingProblem(rhs, left, right, jumps=[(0.5, lambda y, p: p * y[0])])
    # u = r on the left, u' jumps by p u(0.5); with u(1) = 0 this needs p = -4
    assert abs(shoot_two_sided(prob, np.array([-4.0 + 0j]), 0.0, 0.75, 1.0)[0]) < 1e-10


def test_shoot_profiles_samples_both_sides():
    prob = _string_problem()
    lam = np.array([np.pi ** 2], dtype=complex)
    grid = np.linspace(0.0, 1.0, 11)
    yl, shot_l, yr, shot_r = shoot_profiles(prob, lam, 0.0, 0.5, 1.0, grid)
    assert np.allclose(shot_l.r, grid[grid <= 0.5])
    assert np.allclose(shot_l.y[:, 0, 0], np.sin(np.pi * shot_l.r) / np.pi, atol=1e-9)


# --- finite differences ---------------------------------------------------------------


def test_channel_pencil_second_order():
    errs = []
    for n in (100, 200):
        K, M, _ = channel_pencil(lambda z: np.ones_like(z), lambda z: np.zeros_like(z),
                                 lambda z: np.ones_like(z), 1.0, n)
        nu = fd_generalized_eig(K, M).values
        errs.append(abs(1.0 / nu.max() - np.pi ** 2))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.05)


def test_tridiagonal_operator_bessel_zero():
    # A = 1, B = 0: -(u' + u/r)' = lam u on (0, 1) has u = J_1(j r), lam = j^2
    from scipy.special import jn_zeros
    vals = []
    for n in (400, 800):
        main, off, r = radial_operator_tridiagonal(lambda x: np.ones_like(x),
                                                   lambda x: np.zeros_like(x), 1.0, n)
        h = 1.0 / n
        # symmetric scaling by the mass h r of the weight-r inner product
        d = 1.0 / np.sqrt(h * r)
        vals.append(signed_eigenvalue(main * d * d, off * d[:-1] * d[1:], 0))
    exact = jn_zeros(1, 1)[0] ** 2
    assert richardson_extrapolate(*vals) == pytest.approx(exact, rel=1e-5)


def test_axisymmetric_pencil_definite():
    K, M, r = radial_axi_pencil(lambda x: np.ones_like(x), 1.0, 10.0, 200)
    assert np.allclose(K, K.T)
    assert np.all(np.linalg.eigvalsh(K) > 0)


def test_richardson_extrapolation_removes_leading_term():
    f = lambda h: 2.0 + 3.0 * h ** 2
    assert richardson_extrapolate(f(0.1), f(0.05)) == pytest.approx(2.0, abs=1e-14)
