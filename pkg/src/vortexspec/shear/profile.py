"""Channel flows: velocity U(z) and density rho(z) on [0, L] with gravity g."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline


@dataclass(frozen=True)
class ShearProfile:
    """Velocity, density and gravity for a channel of height L.

    The hydrostatic pressure follows from p' = -rho g and is not stored.
    """

    U: Callable
    U_prime: Callable
    U_second: Callable
    rho: Callable
    rho_prime: Callable
    g: float = 0.0
    L: float = 1.0
    spec: dict | None = field(default=None, hash=False, compare=False)
    # optional fast scalar evaluator z -> (U, U', U'', rho, rho')
    pointwise: Callable | None = field(default=None, hash=False, compare=False)

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("channel height L must be positive")
        if self.g < 0:
            raise ValueError("gravity g must be non-negative")
        z = np.linspace(0.0, self.L, 201)
        if np.any(np.asarray(self.rho(z)) <= 0):
            raise ValueError("density must be positive on [0, L]")

    def evaluate(self, z: float):
        """(U, U', U'', rho, rho') at a single height, as floats."""
        if self.pointwise is not None:
            return self.pointwise(z)
        return (float(self.U(z)), float(self.U_prime(z)), float(self.U_second(z)),
                float(self.rho(z)), float(self.rho_prime(z)))

    def N2(self, z):
        """Squared buoyancy frequency -g rho'/rho."""
        return -self.g * np.asarray(self.rho_prime(z)) / np.asarray(self.rho(z))

    def momentum_gradient(self, z):
        """(rho U')'."""
        return (np.asarray(self.rho_prime(z)) * np.asarray(self.U_prime(z))
                + np.asarray(self.rho(z)) * np.asarray(self.U_second(z)))

    def pressure(self, z, p0: float = 0.0):
        """Hydrostatic pressure with p(0) = p0, by cumulative quadrature."""
        from scipy.integrate import cumulative_simpson
        z = np.asarray(z, dtype=float)
        return p0 - self.g * cumulative_simpson(np.asarray(self.rho(z)), x=z, initial=0.0)

    def richardson(self, z):
        """Ri = N^2 / U'^2; where U' = 0 it is +inf, 0 or -inf by the sign of N^2."""
        z = np.asarray(z, dtype=float)
        n2 = np.asarray(self.N2(z), dtype=float) * np.ones_like(z)
        up = np.asarray(self.U_prime(z), dtype=float) * np.ones_like(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ri = n2 / up ** 2
        flat = up == 0
        ri[flat] = np.where(n2[flat] == 0, 0.0, np.copysign(np.inf, n2[flat]))
        return ri

    def to_spec(self) -> dict:
        if self.spec is None:
            raise ValueError("profile was built from callables and has no file form")
        return self.spec


def _const(c):
    return lambda z: c * np.ones_like(np.asarray(z, dtype=float))


def _velocity_scalar(kind: str, p: dict, L: float):
    """math-based (U, U', U'') at one height, for the closed-form kinds."""
    if kind == "zero":
        return lambda z: (0.0, 0.0, 0.0)
    if kind in ("linear", "couette"):
        a, c = p.get("slope", 1.0), p.get("offset", 0.0)
        return lambda z: (a * z + c, a, 0.0)
    if kind == "kolmogorov":
        a = p.get("amplitude", 1.0)

        def f(z):
            sz = math.sin(z - L / 2)
            return a * sz, a * math.cos(z - L / 2), -a * sz
        return f
    if kind == "tanh":
        a, d, c = p.get("amplitude", 1.0), p.get("thickness", 1.0), p.get("center", L / 2)

        def f(z):
            t = math.tanh((z - c) / d)
            sech2 = 1.0 - t * t
            return a * t, a / d * sech2, -2.0 * a / d ** 2 * t * sech2
        return f
    if kind == "poiseuille":
        a = p.get("amplitude", 1.0)
        return lambda z: (4 * a * z * (L - z) / L ** 2, 4 * a * (L - 2 * z) / L ** 2, -8 * a / L ** 2)
    return None


def _density_scalar(kind: str, p: dict, L: float):
    if kind == "uniform":
        r0 = p.get("rho0", 1.0)
        return lambda z: (r0, 0.0)
    if kind == "exponential":
        r0, alpha = p.get("rho0", 1.0), p.get("alpha", 1.0)

        def f(z):
            e = r0 * math.exp(-alpha * z)
            return e, -alpha * e
        return f
    if kind == "linear":
        r0, slope = p.get("rho0", 1.0), p.get("slope", -0.1)
        return lambda z: (r0 + slope * z, slope)
    if kind == "tanh":
        r0, delta = p.get("rho0", 1.0), p.get("delta", 0.1)
        d, c = p.get("thickness", 1.0), p.get("center", L / 2)

        def f(z):
            t = math.tanh((z - c) / d)
            return r0 * (1 - delta * t), -r0 * delta / d * (1 - t * t)
        return f
    return None


def _velocity(kind: str, p: dict, L: float):
    if kind == "zero":
        z0 = _const(0.0)
        return z0, z0, z0
    if kind in ("linear", "couette"):
        a, c = p.get("slope", 1.0), p.get("offset", 0.0)
        return (lambda z: a * np.asarray(z) + c), _const(a), _const(0.0)
    if kind == "kolmogorov":
        a = p.get("amplitude", 1.0)
        return (lambda z: a * np.sin(np.asarray(z) - L / 2),
                lambda z: a * np.cos(np.asarray(z) - L / 2),
                lambda z: -a * np.sin(np.asarray(z) - L / 2))
    if kind == "tanh":
        a, d = p.get("amplitude", 1.0), p.get("thickness", 1.0)
        c = p.get("center", L / 2)

        def t(z):
            return np.tanh((np.asarray(z) - c) / d)
        return (lambda z: a * t(z), lambda z: a / d * (1 - t(z) ** 2),
                lambda z: -2 * a / d ** 2 * t(z) * (1 - t(z) ** 2))
    if kind == "poiseuille":
        a = p.get("amplitude", 1.0)
        return (lambda z: 4 * a * np.asarray(z) * (L - np.asarray(z)) / L ** 2,
                lambda z: 4 * a * (L - 2 * np.asarray(z)) / L ** 2, _const(-8 * a / L ** 2))
    if kind == "polynomial":
        c = np.polynomial.Polynomial(p["coefficients"])
        return c, c.deriv(1), c.deriv(2)
    if kind == "tabulated":
        spl = CubicSpline(p["z"], p["values"])
        return spl, spl.derivative(1), spl.derivative(2)
    raise ValueError(f"unknown velocity kind {kind!r}")


def _density(kind: str, p: dict, L: float):
    if kind == "uniform":
        r0 = p.get("rho0", 1.0)
        return _const(r0), _const(0.0)
    if kind == "exponential":
        r0, alpha = p.get("rho0", 1.0), p.get("alpha", 1.0)
        return (lambda z: r0 * np.exp(-alpha * np.asarray(z)),
                lambda z: -alpha * r0 * np.exp(-alpha * np.asarray(z)))
    if kind == "linear":
        r0, slope = p.get("rho0", 1.0), p.get("slope", -0.1)
        return (lambda z: r0 + slope * np.asarray(z)), _const(slope)
    if kind == "tanh":
        r0, delta = p.get("rho0", 1.0), p.get("delta", 0.1)
        d, c = p.get("thickness", 1.0), p.get("center", L / 2)

        def t(z):
            return np.tanh((np.asarray(z) - c) / d)
        return (lambda z: r0 * (1 - delta * t(z)),
                lambda z: -r0 * delta / d * (1 - t(z) ** 2))
    if kind == "tabulated":
        spl = CubicSpline(p["z"], p["values"])
        return spl, spl.derivative(1)
    raise ValueError(f"unknown density kind {kind!r}")


def make_shear(velocity: str = "zero", density: str = "uniform", L: float = 1.0, g: float = 0.0,
               velocity_params: dict | None = None, density_params: dict | None = None) -> ShearProfile:
    """Channel profile from closed-form (or tabulated) velocity and density.

    Velocity kinds: zero, linear, kolmogorov (U = A sin(z - L/2)), tanh,
    poiseuille, polynomial, tabulated. Density kinds: uniform, exponential
    (rho0 e^(-alpha z), constant N^2 = g alpha), linear, tanh, tabulated.
    """
    vp, dp = dict(velocity_params or {}), dict(density_params or {})
    U, Up, Upp = _velocity(velocity, vp, L)
    rho, rhop = _density(density, dp, L)
    spec = {"velocity": {"kind": velocity, "params": vp},
            "density": {"kind": density, "params": dp}, "g": g, "L": L}
    vs, ds = _velocity_scalar(velocity, vp, L), _density_scalar(density, dp, L)
    pointwise = None
    if vs is not None and ds is not None:
        def pointwise(z):
            return vs(float(z)) + ds(float(z))
    return ShearProfile(U, Up, Upp, rho, rhop, g=float(g), L=float(L), spec=spec, pointwise=pointwise)


def shear_profile_from_spec(spec: dict) -> ShearProfile:
    """Build a profile from its JSON form (see :func:`make_shear`)."""
    try:
        vel = spec.get("velocity", {"kind": "zero"})
        den = spec.get("density", {"kind": "uniform"})
        return make_shear(vel["kind"], den["kind"], L=float(spec["L"]), g=float(spec.get("g", 0.0)),
                          velocity_params=vel.get("params"), density_params=den.get("params"))
    except KeyError as exc:
        raise ValueError(f"malformed shear profile: missing {exc}") from exc
