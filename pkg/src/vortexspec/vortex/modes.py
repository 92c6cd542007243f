"""Fourier mode and spectral parameter bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FourierMode:
    """Angular wavenumber m and axial wavenumber k."""

    m: int
    k: float

    def __post_init__(self):
        if int(self.m) != self.m:
            raise ValueError(f"m must be an integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "k", float(self.k))
        if self.m == 0 and self.k == 0.0:
            raise ValueError("(m, k) = (0, 0) is excluded")

    def conjugate(self) -> "FourierMode":
        return FourierMode(-self.m, -self.k)


@dataclass(frozen=True)
class SpectralParam:
    """s = m (a - i b) for m != 0; gamma = s + i m Omega = i m gamma_star."""

    s: complex
    m: int

    @classmethod
    def from_ab(cls, m: int, a: float, b: float) -> "SpectralParam":
        if m == 0:
            raise ValueError("the (a, b) parametrization needs m != 0")
        return cls(complex(m * (a - 1j * b)), m)

    @property
    def a(self) -> float:
        if self.m == 0:
            raise ValueError("a is undefined for m = 0")
        return float((self.s / self.m).real)

    @property
    def b(self) -> float:
        if self.m == 0:
            raise ValueError("b is undefined for m = 0")
        return float(-(self.s / self.m).imag)

    def gamma(self, omega):
        return self.s + 1j * self.m * np.asarray(omega)

    def gamma_star(self, omega):
        return np.asarray(omega) - self.b - 1j * self.a


def s_from_ab(m: int, a, b):
    return m * (np.asarray(a) - 1j * np.asarray(b))


def ab_from_s(m: int, s):
    z = np.asarray(s, dtype=complex) / m
    return z.real, -z.imag
