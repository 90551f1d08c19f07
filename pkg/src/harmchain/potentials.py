"""Pair potentials for neighbouring particles: harmonic bond and Mie (n, m)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class QuadraticPotential:
    """V(z) = kappa/2 (z - a)^2."""

    kappa: float
    a: float

    def __post_init__(self):
        if not (self.kappa > 0 and self.a > 0):
            raise DomainError("quadratic potential needs kappa > 0 and a > 0")

    def V(self, r):
        return 0.5 * self.kappa * (np.asarray(r) - self.a) ** 2

    def dV(self, r):
        return self.kappa * (np.asarray(r) - self.a)

    def d2V(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.kappa)


@dataclass(frozen=True)
class MiePotential:
    """V(r) = -c_n / r^n + c_m / r^m with 0 < n < m.

    Landmarks are derived on construction: the minimum ``a``, the inflection
    point ``b`` where V'' changes sign, the curvature ``kappa = V''(a)`` and
    the critical ratio ``C = V'(b) / (kappa a)``, i.e. the largest static
    bond force in units of kappa / N when a = 1/N.
    """

    n: float
    m: float
    c_n: float
    c_m: float
    a: float = field(init=False)
    b: float = field(init=False)
    kappa: float = field(init=False)
    C: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.n < self.m:
            raise DomainError(f"Mie exponents need 0 < n < m, got n={self.n}, m={self.m}")
        if not (self.c_n > 0 and self.c_m > 0):
            raise DomainError("Mie coefficients must be positive")
        n, m = self.n, self.m
        a = (m * self.c_m / (n * self.c_n)) ** (1.0 / (m - n))
        b = (m * (m + 1) * self.c_m / (n * (n + 1) * self.c_n)) ** (1.0 / (m - n))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "kappa", float(self.d2V(a)))
        object.__setattr__(self, "C", float(self.dV(b)) / (self.kappa * a))

    def V(self, r):
        r = np.asarray(r, dtype=float)
        return -self.c_n * r ** (-self.n) + self.c_m * r ** (-self.m)

    def dV(self, r):
        r = np.asarray(r, dtype=float)
        return self.n * self.c_n * r ** (-self.n - 1) - self.m * self.c_m * r ** (-self.m - 1)

    def d2V(self, r):
        r = np.asarray(r, dtype=float)
        return (
            -self.n * (self.n + 1) * self.c_n * r ** (-self.n - 2)
            + self.m * (self.m + 1) * self.c_m * r ** (-self.m - 2)
        )

    @property
    def max_force(self) -> float:
        """max of V' over (a, b]; attained at b since V' increases there."""
        return float(self.dV(self.b))


def mie_from_curvature(kappa: float, N: float, n: float, m: float) -> MiePotential:
    """Mie coefficients placing the minimum at a = 1/N with V''(a) = kappa."""
    if not 0 < n < m:
        raise DomainError(f"Mie exponents need 0 < n < m, got n={n}, m={m}")
    if not kappa > 0 or not N > 0:
        raise DomainError("kappa and N must be positive")
    c_m = kappa / (m * (m - n)) * N ** (-2.0 - m)
    c_n = kappa / (n * (m - n)) * N ** (-2.0 - n)
    return MiePotential(n=n, m=m, c_n=c_n, c_m=c_m)


def mie_minimum_value(kappa: float, N: float, n: float, m: float) -> float:
    """Closed-form V(a) = -kappa / (m n) N^-2 for the curvature-fitted potential."""
    return -kappa / (m * n) * N ** -2.0


def printed_critical_ratio(n: float, m: float) -> float:
    """Closed-form critical ratio written with exponents (n-1), (m-1).

    Direct differentiation gives (n+1), (m+1); see ``MiePotential.C``.
    """
    rho = (m + 1) / (n + 1)
    return (rho ** (-(n - 1) / (m - n)) - rho ** (-(m - 1) / (m - n))) / (m - n)


def derived_critical_ratio(n: float, m: float) -> float:
    """Same quantity with the exponents obtained by differentiating V at b."""
    rho = (m + 1) / (n + 1)
    return (rho ** (-(n + 1) / (m - n)) - rho ** (-(m + 1) / (m - n))) / (m - n)


def stiffness_bound(pot, gaps: np.ndarray) -> float:
    """Largest positive curvature over the current gaps (0 if all are concave)."""
    if isinstance(pot, QuadraticPotential):
        return pot.kappa
    return max(float(np.max(pot.d2V(gaps))), 0.0)


__all__ = [
    "QuadraticPotential",
    "MiePotential",
    "mie_from_curvature",
    "mie_minimum_value",
    "printed_critical_ratio",
    "derived_critical_ratio",
    "stiffness_bound",
]
