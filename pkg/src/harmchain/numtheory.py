"""Number-theoretic checks behind the independence of the mode frequencies.

* Euler's totient (trial division) and a sieve for bulk scans.
* Record lows of phi(n)/n, which sit at primorials, with the normalised value
  phi(n) ln ln n / n that creeps up towards exp(-gamma).
* Exhaustive integer-relation search on the frequency ratios
  omega_m / (2 omega0) = sin(pi m / (4N - 2)).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .chain import Convention, dispersion_denominator
from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060
LIMINF_TARGET = math.exp(-EULER_GAMMA)
MAX_SEARCH_SPACE = 2 * 10**9
_TRAILING_BLOCK = 2_000_000


def euler_totient(n: int) -> int:
    """phi(n) by trial-division factorisation.

    Equals the algebraic degree of the primitive root of unity exp(2 pi i / n).
    """
    if int(n) != n or n < 1:
        raise DomainError(f"totient needs an integer n >= 1, got {n!r}")
    n = int(n)
    result, rest, p = n, n, 2
    while p * p <= rest:
        if rest % p == 0:
            while rest % p == 0:
                rest //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if rest > 1:
        result -= result // rest
    return result


def totient_sieve(limit: int) -> np.ndarray:
    """phi(0..limit) as an int64 array (phi(0) = 0)."""
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if phi[p] == p:  # untouched => prime
            phi[p::p] -= phi[p::p] // p
    return phi


def primes_upto(limit: int) -> list[int]:
    if limit < 2:
        return []
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


def primorials_upto(limit: int) -> list[int]:
    out, acc = [], 1
    for p in primes_upto(max(2, math.isqrt(limit) + 64)):
        if acc * p > limit:
            break
        acc *= p
        out.append(acc)
    return out


def totient_liminf_scan(limit: int) -> list[tuple[int, float]]:
    """(n, phi(n) ln ln n / n) at every strict record low of phi(n)/n, n = 2..limit.

    Record lows of phi(n)/n occur exactly at primorials; the normalised values
    increase towards exp(-gamma) ~ 0.5615 from below.
    """
    if limit < 10:
        raise DomainError("limit must be >= 10")
    phi = totient_sieve(limit)
    n = np.arange(2, limit + 1)
    ratio = phi[2:] / n
    running = np.minimum.accumulate(ratio)
    is_record = np.empty(ratio.size, dtype=bool)
    is_record[0] = True
    is_record[1:] = running[1:] < running[:-1]
    return [(int(k), float(r * math.log(math.log(k)))) for k, r in zip(n[is_record], ratio[is_record])]


def frequency_ratios(N: int, M: int, conv: Convention | str = Convention.CORRECTED) -> np.ndarray:
    """omega_m / (2 omega0) for m = 1..M."""
    if not 1 <= M <= 2 * N - 2:
        raise DomainError(f"M must lie in 1..{2 * N - 2}, got {M}")
    return np.sin(np.pi * np.arange(1, M + 1) / dispersion_denominator(N, conv))


@dataclass(frozen=True)
class RelationResult:
    found: bool
    coefficients: tuple[int, ...] = ()  # (a0, a1, ..., aM)
    residual: float = float("nan")

    @property
    def verdict(self) -> str:
        return "relation" if self.found else "no-relation-found"


def exact_residual(values: Sequence[float], coefficients: Sequence[int]) -> float:
    """|sum_m a_m v_m - a0| evaluated exactly on the binary64 inputs."""
    a0, rest = coefficients[0], coefficients[1:]
    total = sum((Fraction(int(a)) * Fraction(float(v)) for a, v in zip(rest, values)), Fraction(0))
    return float(abs(total - a0))


def _normalise(vec: tuple[int, ...]) -> tuple[int, ...]:
    # a0 > 0, or a0 == 0 and the first nonzero a_m > 0
    lead = next(x for x in vec if x != 0)
    return vec if lead > 0 else tuple(-x for x in vec)


def integer_relation_search(
    values: Sequence[float],
    bound: int,
    tol: float = 1e-10,
    max_space: int = MAX_SEARCH_SPACE,
) -> RelationResult:
    """Exhaustive search for integers |a_i| <= bound with sum_m a_m v_m = a0.

    The trailing coordinates are enumerated as a numpy block, leading ones in
    Python; a0 is the nearest integer to the partial sum.  Among all matches
    the lexicographically smallest sign-normalised vector is returned.
    """
    v = np.asarray(values, dtype=float)
    M = v.size
    if M == 0:
        raise DomainError("need at least one value")
    if bound < 1 or not tol > 0:
        raise DomainError("need bound >= 1 and tol > 0")
    span = 2 * bound + 1
    if span ** (M + 1) > max_space:
        raise DomainError(f"search space {span}^{M + 1} exceeds the limit {max_space}")
    coeff = np.arange(-bound, bound + 1)
    q = M
    while q > 1 and span**q > _TRAILING_BLOCK:
        q -= 1
    p = M - q
    trail = np.array(list(itertools.product(coeff, repeat=q)), dtype=np.int64)
    trail_sum = trail @ v[p:]
    trail_zero = ~trail.any(axis=1)
    matches = []
    for lead in itertools.product(coeff.tolist(), repeat=p):
        s = math.fsum(a * x for a, x in zip(lead, v[:p])) + trail_sum
        a0 = np.rint(s)
        ok = (np.abs(s - a0) <= tol) & (np.abs(a0) <= bound)
        if not any(lead):
            ok &= ~trail_zero
        for i in np.flatnonzero(ok):
            matches.append(_normalise((int(a0[i]),) + tuple(lead) + tuple(int(x) for x in trail[i])))
    if not matches:
        return RelationResult(False)
    best = min(matches)
    return RelationResult(True, best, exact_residual(v, best))


def rational_independence_check(
    N: int,
    M: int,
    bound: int,
    tol: float = 1e-10,
    conv: Convention | str = Convention.CORRECTED,
) -> RelationResult:
    return integer_relation_search(frequency_ratios(N, M, conv), bound, tol)
