"""Stability criteria for channel flows and the Squire transformation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics.quadrature import quad_weighted
from .profile import ShearProfile


def rayleigh_inflection_check(profile: ShearProfile, n: int = 4001, rel_tol: float = 1e-12) -> dict:
    """Necessary condition for inviscid instability: U'' changes sign in (0, L).

    Values below ``rel_tol * max|U''|`` count as zero. Sign-change points are
    located by linear interpolation between grid nodes.
    """
    z = np.linspace(0.0, profile.L, n)
    upp = np.asarray(profile.U_second(z), dtype=float) * np.ones_like(z)
    scale = np.max(np.abs(upp))
    points = []
    if scale > 0:
        sig = np.where(np.abs(upp) > rel_tol * scale, np.sign(upp), 0.0)
        nz = np.flatnonzero(sig)
        for i, j in zip(nz[:-1], nz[1:]):
            if sig[i] * sig[j] < 0:
                zi = z[i] - upp[i] * (z[j] - z[i]) / (upp[j] - upp[i])
                points.append(float(zi))
    return {"can_be_unstable": bool(points), "sign_change_points": points}


@dataclass
class MilesHowardReport:
    ri_min: float
    stable_certified: bool
    z: np.ndarray
    ri: np.ndarray

    def to_dict(self) -> dict:
        return {"ri_min": self.ri_min, "stable_certified": self.stable_certified}


def miles_howard_report(profile: ShearProfile, n: int = 2001) -> MilesHowardReport:
    """Minimum Richardson number on a uniform grid; certified stable if >= 1/4."""
    z = np.linspace(0.0, profile.L, n)
    ri = profile.richardson(z)
    ri_min = float(np.min(ri))
    return MilesHowardReport(ri_min=ri_min, stable_certified=bool(ri_min >= 0.25), z=z, ri=ri)


def tg_bracket(profile: ShearProfile, k: float, s: complex, z):
    """k^2 rho U'^2 (Ri - 1/4)/|gamma|^2 = k^2 (-g rho' - rho U'^2/4)/|gamma|^2."""
    z = np.asarray(z, dtype=float)
    gam = s + 1j * k * profile.U(z)
    return (k * k * (-profile.g * profile.rho_prime(z) - 0.25 * profile.rho(z) * profile.U_prime(z) ** 2)
            / np.abs(gam) ** 2)


def howard_substitution_residual(pair, profile: ShearProfile, return_flag: bool = False):
    """Residual of the energy identity for v = u / gamma^(1/2).

    Returns |integral| / integral of rho (|v'|^2 + k^2 |v|^2), i.e. the left
    side divided by Re(s) and by the energy norm of v. The branch of
    gamma^(1/2) is followed continuously along z; a crossing of the
    principal cut is reported through the flag.
    """
    z, u, du, k, s = pair.z, pair.u_z, pair.du_z, pair.k, pair.s
    gam = s + 1j * k * profile.U(z)
    ang = np.unwrap(np.angle(gam))
    crossed = bool(np.any(np.abs(np.angle(gam)[1:] - np.angle(gam)[:-1]) > np.pi))
    root = np.sqrt(np.abs(gam)) * np.exp(0.5j * ang)
    dgam = 1j * k * profile.U_prime(z)
    v = u / root
    dv = du / root - 0.5 * u * dgam / (gam * root)
    rho = profile.rho(z)
    energy = quad_weighted(rho * (np.abs(dv) ** 2 + k * k * np.abs(v) ** 2), z)
    extra = quad_weighted(tg_bracket(profile, k, s, z) * np.abs(v) ** 2, z)
    res = float(abs(energy + extra) / energy)
    return (res, crossed) if return_flag else res


@dataclass(frozen=True)
class SquireMode:
    k: float
    s: complex
    g_equiv: float
    amplification: float  # k / k1

    def to_dict(self) -> dict:
        return {"k": self.k, "s_re": self.s.real, "s_im": self.s.imag, "g_equiv": self.g_equiv,
                "amplification": self.amplification}


def squire_transform(k1: float, k2: float, sigma: complex, g: float) -> SquireMode:
    """Equivalent two-dimensional mode of a 3D plane wave (k1, k2).

    k = (k1^2 + k2^2)^(1/2), s = (k/k1) sigma, g -> (k/k1)^2 g.
    """
    if k1 == 0:
        raise ValueError("k1 must be nonzero")
    k = float(np.hypot(k1, k2))
    ratio = k / k1
    g_equiv = (k1 * k1 + k2 * k2) / (k1 * k1) * g
    return SquireMode(k=k, s=complex(ratio * complex(sigma)), g_equiv=float(g_equiv),
                      amplification=ratio)
