"""Double-scaling experiments and the static Mie fixed-point analysis.

Dynamic side: with lattice spacing a = 1/N and a driving ratio sigma(N),
the maximal relative bond extension is

    r(N) = 1 + N sigma(N) (l + sup_t I) / l,

which tends to 1 when sigma N ln N -> 0 and grows without bound when
sigma N ln N -> infinity.

Static side: for a Mie bond the pulled chain has a fixed point iff the force
does not exceed the maximal bond tension V'(b) at the inflection point b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from .chain import AnalysisWindow, ChainParams, Convention, as_convention
from .errors import DomainError
from .extremal import DEFAULT_HORIZON_PERIODS, sup_inf_extension, torus_lower_bound, window_offsets
from .potentials import (
    MiePotential,
    QuadraticPotential,
    mie_from_curvature,
    mie_minimum_value,
    printed_critical_ratio,
)

VANISHES = "extension-vanishes"
DIVERGES = "extension-diverges"
INCONCLUSIVE = "inconclusive"

SLOPE_STABILITY = 0.30
DIVERGENCE_LEVEL = 2.0
ESTIMATORS = ("sampled", "torus", "triangle")


@dataclass(frozen=True)
class ScalingFamily:
    """sigma(N) = c N^-alpha (ln N)^-beta.  c = 0 gives the undriven chain."""

    c: float
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.c < 0:
            raise DomainError("family amplitude c must be >= 0")

    def sigma(self, N: int) -> float:
        return self.c * N ** (-self.alpha) * math.log(N) ** (-self.beta)


def _k_samples(N: int, l: int, epsilon: float, full_k: bool) -> list[int]:
    if full_k:
        top = math.floor((1 - epsilon) * N + 1e-12)
        return list(range(0, top - l + 1))
    return window_offsets(N, l, epsilon)


def max_deviation(
    N: int,
    l: int = 1,
    epsilon: float = 0.25,
    horizon_periods: float = DEFAULT_HORIZON_PERIODS,
    full_k: bool = False,
    conv: Convention | str = Convention.CORRECTED,
    estimator: str = "torus",
    c: float = 1.0,
) -> float:
    """max over sampled k of an estimate of sup_t I_{N,k,l} (sigma-free).

    ``sampled``: best value on the finite horizon (a lower bound).
    ``torus``: the larger of ``sampled`` and head - tail at M(N, c), the
    all-time bound granted by density of the frequency orbit.
    ``triangle``: sum of |amplitudes| (an upper bound).
    """
    if estimator not in ESTIMATORS:
        raise DomainError(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")
    ks = _k_samples(N, l, epsilon, full_k)
    if not ks:
        raise DomainError(f"no admissible window for N={N}, l={l}, eps={epsilon}")
    params = ChainParams.from_sigma(N, 1.0)
    best = -math.inf
    for k in ks:
        rep = sup_inf_extension(params, AnalysisWindow(k, l, epsilon), horizon_periods, conv)
        if estimator == "sampled":
            value = rep.sup_lower
        elif estimator == "triangle":
            value = rep.sup_upper
        else:
            value = max(rep.sup_lower, torus_lower_bound(N, k, l, c, conv))
        best = max(best, value)
    return best


def relative_extension(
    N: int,
    sigma: float,
    l: int = 1,
    epsilon: float = 0.25,
    horizon_periods: float = DEFAULT_HORIZON_PERIODS,
    full_k: bool = False,
    conv: Convention | str = Convention.CORRECTED,
    estimator: str = "torus",
) -> float:
    """Largest gap over l bonds in units of its lattice length l/N (a = 1/N)."""
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    if sigma == 0:
        return 1.0
    sup_I = max_deviation(N, l, epsilon, horizon_periods, full_k, conv, estimator)
    return 1.0 + N * sigma * (l + sup_I) / l


@dataclass
class PhaseVerdict:
    family: ScalingFamily
    ladder: list[int]
    r: list[float]
    classification: str
    slope: float
    local_slopes: list[float] = field(default_factory=list)
    estimator: str = "torus"

    def as_dict(self) -> dict:
        return {
            "family": {"c": self.family.c, "alpha": self.family.alpha, "beta": self.family.beta},
            "ladder": list(self.ladder),
            "sigma": [self.family.sigma(N) for N in self.ladder],
            "r": list(self.r),
            "classification": self.classification,
            "slope": self.slope,
            "local_slopes": list(self.local_slopes),
            "estimator": self.estimator,
        }


def classify(ladder: Sequence[int], r: Sequence[float]) -> tuple[str, float, list[float]]:
    """Classification rule for a ladder of relative extensions.

    * vanishes: r == 1 throughout, or r - 1 positive and strictly decreasing;
    * diverges: r strictly increasing and either the last r exceeds 2 or the
      local slopes dr/dlnN agree within 30% of their mean (growth ~ ln N);
    * inconclusive otherwise, and always for fewer than two points.
    """
    r = np.asarray(r, dtype=float)
    lnN = np.log(np.asarray(ladder, dtype=float))
    if len(r) < 2:
        return INCONCLUSIVE, float("nan"), []
    slope = float(np.polyfit(lnN, r, 1)[0])
    local = list(np.diff(r) / np.diff(lnN))
    excess = r - 1.0
    if np.all(excess == 0):
        return VANISHES, slope, local
    if np.all(excess > 0) and np.all(np.diff(excess) < 0):
        return VANISHES, slope, local
    if np.all(np.diff(r) > 0):
        mean = float(np.mean(local))
        stable = mean > 0 and all(abs(s - mean) <= SLOPE_STABILITY * mean for s in local)
        if r[-1] > DIVERGENCE_LEVEL or stable:
            return DIVERGES, slope, local
    return INCONCLUSIVE, slope, local


@dataclass(frozen=True)
class _RungTask:
    l: int
    epsilon: float
    horizon_periods: float
    full_k: bool
    conv: str
    estimator: str

    def __call__(self, N: int) -> float:
        return max_deviation(N, self.l, self.epsilon, self.horizon_periods, self.full_k, self.conv, self.estimator)


def phase_sweep(
    family: ScalingFamily,
    ladder: Iterable[int],
    l: int = 1,
    epsilon: float = 0.25,
    horizon_periods: float = DEFAULT_HORIZON_PERIODS,
    full_k: bool = False,
    conv: Convention | str = Convention.CORRECTED,
    estimator: str = "torus",
    mapper: Callable = map,
) -> PhaseVerdict:
    ladder = [int(N) for N in ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise DomainError("ladder must be strictly increasing")
    if any(N < 16 for N in ladder):
        raise DomainError("ladder entries must be >= 16")
    if family.c == 0:
        r = [1.0] * len(ladder)
    else:
        task = _RungTask(l, epsilon, horizon_periods, full_k, as_convention(conv).value, estimator)
        sups = list(mapper(task, ladder))
        r = [1.0 + N * family.sigma(N) * (l + s) / l for N, s in zip(ladder, sups)]
    label, slope, local = classify(ladder, r)
    return PhaseVerdict(family, ladder, r, label, slope, local, estimator)


# --- statics ---------------------------------------------------------------


class _NoFixedPoint:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NoFixedPoint"

    def __bool__(self) -> bool:
        return False


NoFixedPoint = _NoFixedPoint()


@dataclass(frozen=True)
class MieFit:
    potential: MiePotential
    V_at_a: float  # closed form -kappa/(mn) N^-2
    dV_at_a: float
    d2V_at_a: float


def mie_fit_from_curvature(kappa: float, N: float, n: float, m: float) -> MieFit:
    """Mie coefficients with minimum at 1/N and curvature kappa, plus direct checks."""
    if n >= m:
        raise DomainError(f"need n < m, got n={n}, m={m}")
    pot = mie_from_curvature(kappa, N, n, m)
    a = 1.0 / N
    return MieFit(
        potential=pot,
        V_at_a=mie_minimum_value(kappa, N, n, m),
        dV_at_a=float(pot.dV(a)),
        d2V_at_a=float(pot.d2V(a)),
    )


def inflection_point(pot: MiePotential) -> float:
    """Root of V'' to the right of the minimum, found numerically."""
    lo, hi = pot.a, 2.0 * pot.a
    while pot.d2V(hi) > 0:
        hi *= 2.0
    return optimize.brentq(lambda r: float(pot.d2V(r)), lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class CriticalRatio:
    n: float
    m: float
    value: float  # N V'(b) / kappa, authoritative
    printed: float  # closed form with exponents (n-1), (m-1)
    mismatch: bool

    def as_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "C": self.value, "C_printed": self.printed, "mismatch": self.mismatch}


def critical_force_ratio(n: float, m: float, N: float = 1.0, mismatch_rtol: float = 1e-6) -> CriticalRatio:
    if not 0 < n < m:
        raise DomainError(f"need 0 < n < m, got n={n}, m={m}")
    pot = mie_from_curvature(1.0, N, n, m)
    value = N * float(pot.dV(inflection_point(pot))) / pot.kappa
    printed = printed_critical_ratio(n, m)
    return CriticalRatio(n, m, value, printed, abs(printed - value) > mismatch_rtol * abs(value))


def static_fixed_point(pot: Union[QuadraticPotential, MiePotential], f: float, rtol: float = 1e-12):
    """Equilibrium bond length h with V'(h) = f, or ``NoFixedPoint``."""
    if f < 0:
        raise DomainError("force must be >= 0")
    if isinstance(pot, QuadraticPotential):
        return pot.a + f / pot.kappa
    if f == 0:
        return pot.a
    f_max = pot.max_force
    if f > f_max * (1 + 1e-12):
        return NoFixedPoint
    if f >= f_max:
        return pot.b
    return optimize.bisect(lambda h: float(pot.dV(h)) - f, pot.a, pot.b, xtol=rtol * pot.a, rtol=rtol)


def static_analysis(n: float, m: float, kappa: float, N: float, forces: Iterable[float]) -> dict:
    fit = mie_fit_from_curvature(kappa, N, n, m)
    pot = fit.potential
    crit = critical_force_ratio(n, m, N)
    rows = []
    for f in forces:
        h = static_fixed_point(pot, float(f))
        rows.append({"f": float(f), "sigma": float(f) / kappa, "h": None if h is NoFixedPoint else float(h)})
    return {
        "n": n,
        "m": m,
        "kappa": kappa,
        "N": N,
        "c_n": pot.c_n,
        "c_m": pot.c_m,
        "a": pot.a,
        "b": inflection_point(pot),
        "V_a": fit.V_at_a,
        "C": crit.value,
        "C_printed": crit.printed,
        "C_mismatch": crit.mismatch,
        "critical_force": kappa * crit.value / N,
        "fixed_points": rows,
    }


def static_threshold(pot: MiePotential, N: Optional[float] = None) -> float:
    """kappa C / N, the largest force with a static equilibrium."""
    N = 1.0 / pot.a if N is None else N
    return pot.kappa * pot.C / N
