"""Kelvin modes of the Rankine vortex from the closed-form dispersion relation.

With Omega = 1 in r < 1 and Omega = 1/r^2 outside, neutral modes s = -i m b
satisfy

    I_m'(beta) / (beta I_m(beta)) + 2 / ((1 - b) beta^2) = K_m'(k) / (k K_m(k)),
    beta^2 = k^2 (1 - 4 / (m^2 (1 - b)^2)).

Using I_m' = I_{m+1} + (m/beta) I_m, the left side is evaluated as

    G(beta^2) + m^2 (1 - b) / (k^2 (|m| (1 - b) - 2)),   G = I_{m+1}(beta) / (beta I_m(beta)),

which is regular at beta = 0 (G -> 1/(2(|m| + 1))). For beta^2 = -y^2 < 0,
G = J_{m+1}(y) / (y J_m(y)), real, with poles at the zeros of J_m.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

SMALL_BETA2 = 1e-8
B_FLOOR = 1e-8  # closest approach to the accumulation point b = 1


@dataclass(frozen=True)
class BesselPair:
    order: int
    x: float
    value_I: float
    deriv_I: float
    value_K: float
    deriv_K: float

    @property
    def wronskian(self) -> float:
        """I K' - I' K, equal to -1/x."""
        return self.value_I * self.deriv_K - self.deriv_I * self.value_K


@dataclass(frozen=True)
class DispersionRoot:
    b: float
    branch: str  # above_1 or below_1
    residual: float
    beta_squared: float
    n: int = 0  # position in its sequence, 1 = farthest from b = 1

    def to_dict(self) -> dict:
        return {"branch": self.branch, "n": self.n, "b": self.b, "beta2": self.beta_squared,
                "residual": self.residual}


def bessel_mod(m: int, x: float) -> BesselPair:
    """I_m, K_m and their derivatives at x > 0 (derivatives by recurrence)."""
    if int(m) != m or m < 0:
        raise ValueError("order m must be a non-negative integer")
    if not x > 0:
        raise ValueError("argument x must be positive")
    m = int(m)
    i_m, i_lo, i_hi = special.iv([m, m - 1, m + 1], x) if m > 0 else special.iv([0, 1, 1], x)
    k_m, k_lo, k_hi = special.kv([m, abs(m - 1), m + 1], x)
    return BesselPair(order=m, x=float(x), value_I=float(i_m), deriv_I=float(0.5 * (i_lo + i_hi)),
                      value_K=float(k_m), deriv_K=float(-0.5 * (k_lo + k_hi)))


def _k_ratio(m: int, k: float) -> float:
    """K_m'(k) / (k K_m(k)), from exponentially scaled values."""
    num = -0.5 * (special.kve(abs(m - 1), k) + special.kve(m + 1, k))
    return float(num / (k * special.kve(m, k)))


def _g_term(m: int, beta2: float) -> float:
    """I_{m+1}(beta) / (beta I_m(beta)) as a real function of beta^2."""
    if abs(beta2) < SMALL_BETA2:
        # two-term Taylor series in beta^2
        return 1.0 / (2 * (m + 1)) - beta2 / (8 * (m + 1) ** 2 * (m + 2))
    if beta2 > 0:
        beta = np.sqrt(beta2)
        return float(special.ive(m + 1, beta) / (beta * special.ive(m, beta)))
    y = np.sqrt(-beta2)
    jm = special.jv(m, y)
    if jm == 0:
        return float(np.copysign(np.inf, special.jv(m + 1, y)))
    return float(special.jv(m + 1, y) / (y * jm))


def beta_squared(m: int, k: float, b: float) -> float:
    return float(k * k * (1.0 - 4.0 / (m * m * (1.0 - b) ** 2)))


def dispersion_residual(m: int, k: float, b: float) -> float:
    """Left minus right side of the dispersion relation (real).

    At a pole (a zero of J_m, or b = 1 - 2/|m|) the result is a signed
    infinity. Only |m| and |k| enter.
    """
    if m == 0 or k == 0:
        raise ValueError("dispersion relation needs m != 0 and k != 0")
    if b == 1:
        raise ValueError("b = 1 is the accumulation point and is excluded")
    n, k = abs(int(m)), abs(float(k))
    d = 1.0 - b
    denom = n * d - 2.0
    if denom == 0:
        return float("inf")
    rest = n * n * d / (k * k * denom)
    return _g_term(n, beta_squared(n, k, b)) + rest - _k_ratio(n, k)


def _b_from_y(m: int, k: float, y, sign: float):
    """b on one branch (sign = +1 above 1) for beta^2 = -y^2."""
    c = 1.0 / np.sqrt(1.0 + (np.asarray(y) / k) ** 2)
    return 1.0 + sign * 2.0 * c / m


def _residual_y(m: int, k: float, y: float, sign: float) -> float:
    """The residual as a function of y on one branch, without forming b.

    With c = (1 + y^2/k^2)^(-1/2) and 1 - b = -2 sign c / m, the regular
    remainder m^2 (1 - b) / (k^2 (m (1 - b) - 2)) is m c / (k^2 (1 + c)) above 1
    and m c / (k^2 (c - 1)) below, where 1 - c is formed stably.
    """
    t = (y / k) ** 2
    root = np.sqrt(1.0 + t)
    c = 1.0 / root
    if sign > 0:
        rest = m * c / (k * k * (1.0 + c))
    else:
        one_minus_c = t / (root * (1.0 + root))
        rest = -m * c / (k * k * one_minus_c) if one_minus_c > 0 else -np.inf
    return _g_term(m, -y * y) + rest - _k_ratio(m, k)


def dispersion_poles(m: int, k: float, count: int) -> dict:
    """b values of the first ``count`` poles on each branch (zeros of J_m)."""
    n, k = abs(int(m)), abs(float(k))
    j = special.jn_zeros(n, count)
    return {"above_1": [float(b) for b in _b_from_y(n, k, j, 1.0)],
            "below_1": [float(b) for b in _b_from_y(n, k, j, -1.0)] + [1.0 - 2.0 / n]}


def kelvin_modes_rankine(m: int, k: float, count: int = 5, n_scan: int = 64) -> dict:
    """First ``count`` dispersion roots on each side of b = 1.

    Between consecutive zeros of J_m (and between 0 and the first zero) the
    residual is scanned on ``n_scan`` interior points in y = sqrt(-beta^2)
    and each sign change polished with Brent's method. The search stops at
    |b - 1| < 1e-8. Returns ``{"upper": [...], "lower": [...], "message": str}``.
    """
    if m == 0 or k == 0:
        raise ValueError("Kelvin modes need m != 0 and k != 0")
    if count < 1:
        raise ValueError("count must be at least 1")
    n, k = abs(int(m)), abs(float(k))
    y_max = k * np.sqrt(4.0 / (n * n * B_FLOOR ** 2) - 1.0)
    out, message = {}, ""
    for name, branch, sign in (("upper", "above_1", 1.0), ("lower", "below_1", -1.0)):
        f = lambda y, sg=sign: _residual_y(n, k, y, sg)
        roots, lo, i = [], 0.0, 1
        while len(roots) < count:
            hi = float(special.jn_zeros(n, i)[-1])
            if lo >= y_max:
                break
            hi_c = min(hi, y_max)
            eps = 1e-9 * (hi_c - lo)
            ys = np.linspace(lo + eps, hi_c - eps, n_scan)
            vals = np.array([f(y) for y in ys])
            for j in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
                y = optimize.brentq(f, ys[j], ys[j + 1], xtol=1e-15 * max(1.0, ys[j]), rtol=1e-15)
                b = float(_b_from_y(n, k, y, sign))
                roots.append(DispersionRoot(b=b, branch=branch, residual=abs(dispersion_residual(n, k, b)),
                                            beta_squared=beta_squared(n, k, b), n=len(roots) + 1))
            lo, i = hi, i + 1
        if len(roots) < count:
            message += f"{name}: found {len(roots)} of {count} roots above |b - 1| = {B_FLOOR:g}; "
        out[name] = roots[:count]
    out["message"] = message.strip()
    return out
