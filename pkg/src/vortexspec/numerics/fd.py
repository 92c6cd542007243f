"""Second-order finite-difference oracles for the eigenvalue problems.

Symmetric-definite pencils are assembled in flux form so that the matrices
are exactly symmetric; Dirichlet conditions are imposed by dropping the
boundary unknowns (their eigenvector entries are zero by construction).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg


@dataclass
class PencilEigs:
    values: np.ndarray
    vectors: np.ndarray
    grid: np.ndarray  # interior nodes


def channel_pencil(p_coef, q_coef, w_coef, L: float, n: int):
    """Matrices K, M for -(p u')' + q u = lam w u on (0, L), u(0) = u(L) = 0.

    Returns ``(K, M, z_interior)`` with K symmetric (tridiagonal, dense
    storage) and M diagonal; entries are scaled by h so that both are
    symmetric.
    """
    z = np.linspace(0.0, L, n + 1)
    h = L / n
    zi = z[1:-1]
    p_half = np.asarray(p_coef(0.5 * (z[:-1] + z[1:])), dtype=float)
    main = (p_half[:-1] + p_half[1:]) / h + h * np.asarray(q_coef(zi), dtype=float)
    off = -p_half[1:-1] / h
    K = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    M = np.diag(h * np.asarray(w_coef(zi), dtype=float))
    return K, M, zi


def fd_generalized_eig(K, M, grid=None) -> PencilEigs:
    """Eigenvalues nu of ``M v = nu K v`` for symmetric M and positive-definite K.

    Writing the pencil this way (rather than ``K v = lam M v``) keeps it
    definite when M is indefinite or singular; nu = 1/lam.
    """
    nu, vec = linalg.eigh(M, K)
    return PencilEigs(values=nu, vectors=vec, grid=grid)


def rt_fd_oracle(rho, rho_prime, g: float, k: float, L: float, n: int = 2000,
                 boussinesq_n2=None) -> np.ndarray:
    """s^2 values of the Rayleigh-Taylor problem by finite differences.

    Full form: -(rho u')' + k^2 rho u = (k^2 g / s^2) rho' u. Boussinesq form
    (``boussinesq_n2`` given): -u'' + k^2 u = -(k^2 N^2 / s^2) u.
    Returned values are nu = s^2, sorted by decreasing |nu|, with the
    (numerically) zero ones removed.
    """
    if boussinesq_n2 is not None:
        K, M, _ = channel_pencil(lambda z: np.ones_like(z), lambda z: k * k * np.ones_like(z),
                                 lambda z: -k * k * np.asarray(boussinesq_n2(z)), L, n)
    else:
        K, M, _ = channel_pencil(rho, lambda z: k * k * np.asarray(rho(z)),
                                 lambda z: k * k * g * np.asarray(rho_prime(z)), L, n)
    nu = fd_generalized_eig(K, M).values
    scale = np.max(np.abs(nu)) if nu.size else 0.0
    nu = nu[np.abs(nu) > 1e-10 * max(scale, 1e-300)]
    return nu[np.argsort(-np.abs(nu))]


def radial_axi_pencil(phi, k: float, R: float, n: int):
    """Pencil for -((r u)'/r)' + k^2 u = -(k^2 Phi / s^2) u on (0, R), weight r.

    Unknowns u_i at r_i = i h; the flux term is discretized on x = r u.
    Returns ``(K, M, r)`` with ``M v = s^2 K v``.
    """
    r_all = np.linspace(0.0, R, n + 1)
    h = R / n
    r = r_all[1:-1]
    r_half = 0.5 * (r_all[:-1] + r_all[1:])
    c = 1.0 / (h * r_half)  # weight of ((r u)_{i+1} - (r u)_i)^2
    main = (c[:-1] + c[1:]) * r * r + h * k * k * r
    off = -c[1:-1] * r[:-1] * r[1:]
    K = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    M = np.diag(-h * k * k * np.asarray(phi(r)) * r)
    return K, M, r


def radial_operator_tridiagonal(A_fn, B_fn, R: float, n: int, r_min: float = 0.0):
    """Symmetric tridiagonal discretization of u -> -(A u*)' + B u, weight r.

    Quadratic form sum A_{i+1/2}/(h r_{i+1/2}) ((r u)_{i+1} - (r u)_i)^2
    + h sum B_i u_i^2 r_i, Dirichlet at both ends. Returns (diag, offdiag, r).
    """
    r_all = np.linspace(r_min, R, n + 1)
    h = (R - r_min) / n
    r = r_all[1:-1]
    r_half = 0.5 * (r_all[:-1] + r_all[1:])
    c = np.asarray(A_fn(r_half)) / (h * r_half)
    main = (c[:-1] + c[1:]) * r * r + h * np.asarray(B_fn(r)) * r
    off = -c[1:-1] * r[:-1] * r[1:]
    return main, off, r


def signed_eigenvalue(main, off, index: int) -> float:
    """The ``index``-th smallest eigenvalue of a symmetric tridiagonal matrix."""
    return float(linalg.eigh_tridiagonal(main, off, eigvals_only=True,
                                         select="i", select_range=(index, index))[0])


def dense_linear_eig(L_mat, R_mat):
    """Eigenvalues of the linear pencil ``L v = s R v`` (dense, QZ)."""
    vals = linalg.eig(L_mat, R_mat, right=False)
    return vals[np.isfinite(vals)]


def rayleigh_channel_matrices(U, U2, k: float, L: float, n: int):
    """Pencil for s(-D2 + k^2) u = -i k [U(-D2 + k^2) + U''] u, Dirichlet."""
    z = np.linspace(0.0, L, n + 1)[1:-1]
    h = L / n
    m = len(z)
    D2 = (np.diag(np.full(m, -2.0)) + np.diag(np.ones(m - 1), 1)
          + np.diag(np.ones(m - 1), -1)) / h ** 2
    lap = -D2 + k * k * np.eye(m)
    rhs = -1j * k * (np.diag(U(z)) @ lap + np.diag(U2(z)))
    return rhs, lap.astype(complex), z


def twod_vortex_matrices(omega, w_prime, m: int, R: float, n: int):
    """Pencil for s L u = -i m (Omega L + r W') u with L u = -(r^2 u*)' + m^2 u.

    Rows are the r-weighted quadratic-form discretization (so L is
    symmetric); the pencil itself is not Hermitian.
    """
    main, off, r = radial_operator_tridiagonal(lambda x: x * x, lambda x: m * m * np.ones_like(x), R, n)
    h = R / n
    Lm = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    # mass-like weight to undo the r h row scaling on the potential terms
    rhs = -1j * m * (np.diag(omega(r)) @ Lm + np.diag(h * r * r * w_prime(r)))
    return rhs, Lm.astype(complex), r


def richardson_extrapolate(coarse: float, fine: float, order: int = 2) -> float:
    """Combine results at spacing h and h/2 for a method of the given order."""
    f = 2.0 ** order
    return (f * fine - coarse) / (f - 1.0)
