"""Two-sided estimates of the all-time sup/inf of the extension deviation.

The deviation I_{N,k,l}(t) is a finite cosine sum, so its supremum over
t >= 0 is bracketed by

* a sampled lower bound: dense uniform grid plus golden-section refinement of
  the best local maxima, and
* the triangle bound sum |amplitude|, which is attained in the limit when the
  frequencies are rationally independent (density of the torus orbit).

Ratio scans divide the measured sup by F_N(l) = l ln(N/l) and fit the
band constants c1..c4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .chain import (
    AnalysisWindow,
    ChainParams,
    Convention,
    CosineSum,
    as_convention,
    deviation_sum,
    extension_coefficients,
    mode_frequencies,
)
from .errors import DomainError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
POINTS_PER_PERIOD = 16
DEFAULT_HORIZON_PERIODS = 50


def f_N(N: float, x: float) -> float:
    """F_N(x) = x ln(N/x)."""
    if not x > 0:
        raise DomainError(f"F_N needs x > 0, got {x!r}")
    if x > N:
        raise DomainError(f"F_N needs x <= N, got x={x!r}, N={N!r}")
    return x * math.log(N / x)


def m_of_n(N: int, c: float = 1.0) -> int:
    """Mode cutoff floor(c N / ln ln N), clamped to [1, 2N-2]."""
    if N < 16:
        raise DomainError(f"M(N) is defined here for N >= 16, got N={N}")
    if not c > 0:
        raise DomainError("c must be positive")
    M = math.floor(c * N / math.log(math.log(N)))
    return min(max(M, 1), 2 * N - 2)


@dataclass(frozen=True)
class ExtremalReport:
    N: int
    window: AnalysisWindow
    sigma: float
    sup_lower: float
    sup_upper: float
    inf_upper: float
    inf_lower: float
    t_at_sup: float
    t_at_inf: float
    horizon: float
    flagged: bool = False

    @property
    def F(self) -> float:
        return f_N(self.N, self.window.l)

    @property
    def ratio_sup(self) -> float:
        return self.sup_lower / self.F

    @property
    def ratio_inf(self) -> float:
        # -inf_t I  bounds  l - inf_t sigma^-1 (x_{k+l} - x_k)
        return -self.inf_upper / self.F


def _golden_max(fun, lo: np.ndarray, hi: np.ndarray, rtol: float = 1e-6):
    """Vectorised golden-section search for the maximum of ``fun`` on each [lo, hi]."""
    lo, hi = lo.astype(float), hi.astype(float)
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    tol = rtol * np.maximum(np.abs(hi), np.finfo(float).tiny)
    for _ in range(200):
        if not np.any(hi - lo > tol):
            break
        left = f1 >= f2  # maximum lies in [lo, x2]
        hi, lo = np.where(left, x2, hi), np.where(left, lo, x1)
        new_x1 = np.where(left, hi - GOLDEN * (hi - lo), x2)
        new_x2 = np.where(left, x1, lo + GOLDEN * (hi - lo))
        fp = fun(np.where(left, new_x1, new_x2))
        f1, f2 = np.where(left, fp, f2), np.where(left, f1, fp)
        x1, x2 = new_x1, new_x2
    xs = np.where(f1 >= f2, x1, x2)
    return xs, np.maximum(f1, f2)


def _refine_extremum(S: CosineSum, values: np.ndarray, dt: float, sign: float, max_refine: int):
    """Best (t, value) of sign*S: grid maximum and golden refinement of top brackets."""
    v = sign * values
    j_best = int(np.argmax(v))
    best_t, best_v = j_best * dt, float(v[j_best])
    if v.size < 3:
        return best_t, best_v, True
    inner = v[1:-1]
    peaks = np.flatnonzero((inner >= v[:-2]) & (inner >= v[2:])) + 1
    if peaks.size == 0:
        return best_t, best_v, True
    # a peak between grid points exceeds its grid value by at most max|S''| dt^2 / 2
    slack = 0.5 * float(np.sum(np.abs(S.amplitudes) * S.frequencies**2)) * dt * dt
    keep = peaks[v[peaks] >= best_v - slack]
    keep = keep[np.argsort(-v[keep], kind="stable")[:max_refine]]
    if keep.size == 0:  # grid maximum at an end point, no competing interior peak
        return best_t, best_v, False
    ts, vals = _golden_max(lambda t: sign * S(t), (keep - 1) * dt, (keep + 1) * dt)
    i = int(np.argmax(vals))
    if vals[i] > best_v:
        best_t, best_v = float(ts[i]), float(vals[i])
    return best_t, best_v, False


def sample_grid(N: int, omega0: float, horizon_periods: float, conv=Convention.CORRECTED):
    """(dt, n_points): 16 samples per fastest period over horizon_periods slow periods."""
    w = mode_frequencies(N, omega0, conv)
    dt = (2.0 * math.pi / w.max()) / POINTS_PER_PERIOD
    T = horizon_periods * 2.0 * math.pi / w.min()
    return dt, int(math.floor(T / dt + 1e-9)) + 1, T


def sup_inf_extension(
    params: ChainParams,
    window: AnalysisWindow,
    horizon_periods: float = DEFAULT_HORIZON_PERIODS,
    conv: Convention | str = Convention.CORRECTED,
    max_refine: int = 64,
) -> ExtremalReport:
    """Sampled sup/inf of I_{N,k,l} with triangle-inequality upper/lower bounds."""
    if horizon_periods < 0:
        raise DomainError("horizon_periods must be >= 0")
    window.check(params.N)
    S = deviation_sum(params, window.k, window.l, conv)
    dt, n_points, T = sample_grid(params.N, params.omega0, horizon_periods, conv)
    values = S.grid(dt, n_points)
    t_sup, v_sup, flag_sup = _refine_extremum(S, values, dt, 1.0, max_refine)
    t_inf, v_inf, flag_inf = _refine_extremum(S, values, dt, -1.0, max_refine)
    bound = S.abs_sum()
    return ExtremalReport(
        N=params.N,
        window=window,
        sigma=params.sigma,
        sup_lower=float(v_sup),
        sup_upper=float(bound),
        inf_upper=float(-v_inf),
        inf_lower=float(-bound),
        t_at_sup=float(t_sup),
        t_at_inf=float(t_inf),
        horizon=float(T),
        flagged=bool(flag_sup or flag_inf),
    )


def curvature_constant_bound(conv: Convention | str = Convention.CORRECTED) -> float:
    """C with |a_m| <= C N^2/m^2 for all N and 1 <= m <= 2N-2 (Jordan's inequality).

    |a_m| <= 1/sin^2(pi m/den) <= (den/2m)^2 and den/(2N) < 2 (corrected)
    or < 4 (paper-literal).
    """
    return 4.0 if as_convention(conv) is Convention.CORRECTED else 16.0


def torus_partial_sum_bound(
    N: int,
    k: int,
    l: int,
    M: int,
    conv: Convention | str = Convention.CORRECTED,
    constant: Optional[float] = None,
    tail: str = "curvature",
) -> tuple[float, float]:
    """(head, tail) splitting the triangle bound of I at mode M.

    head sums |a_m b_m| over odd m <= M exactly.  The tail bounds the rest:
    ``"curvature"`` by C N^2/m^2 (C from ``curvature_constant_bound`` unless
    given), ``"exact"`` by sum |a_m b_m| itself.  head + tail always bounds
    sup I from above; head - tail bounds it from below once modes 1..M are
    rationally independent.
    """
    if not 1 <= M <= 2 * N - 2:
        raise DomainError(f"M must lie in 1..{2 * N - 2}, got {M}")
    ec = extension_coefficients(N, k, l, conv)
    scale = 2.0 / (2 * N - 1)
    amp = np.abs(ec.a_m * ec.b_m)
    head = scale * math.fsum(amp[:M])
    if tail == "exact":
        return head, scale * math.fsum(amp[M:])
    if tail != "curvature":
        raise DomainError(f"unknown tail rule {tail!r}")
    C = curvature_constant_bound(conv) if constant is None else constant
    m = np.arange(1, 2 * N - 1)
    odd_tail = m[(m > M) & (m % 2 == 1)].astype(float)
    return head, scale * math.fsum(C * N * N / odd_tail**2)


def torus_lower_bound(N: int, k: int, l: int, c: float = 1.0, conv=Convention.CORRECTED) -> float:
    """All-time lower bound head - exact tail at the cutoff M(N, c).

    Valid when the first M(N, c) frequency ratios are rationally independent.
    For N < 16 every mode is kept (M = 2N-2, empty tail).
    """
    M = m_of_n(N, c) if N >= 16 else 2 * N - 2
    head, rest = torus_partial_sum_bound(N, k, l, M, conv, tail="exact")
    return head - rest


def window_offsets(N: int, l: int, epsilon: float) -> list[int]:
    """Sample of left ends k: 0, quarter, half and the last admissible position."""
    top = math.floor((1 - epsilon) * N + 1e-12)
    cands = {0, math.floor(top / 4), math.floor(top / 2), top - l}
    return sorted(k for k in cands if k >= 0 and k + l <= (1 - epsilon) * N + 1e-12)


def pow2_l_rule(N: int) -> list[int]:
    """l = 1, 2, 4, ..., floor(N/4)."""
    out, l = [], 1
    while l <= N // 4:
        out.append(l)
        l *= 2
    return out


@dataclass(frozen=True)
class _WindowTask:
    omega0: float
    sigma: float
    epsilon: float
    horizon_periods: float
    conv: str

    def __call__(self, nkl) -> ExtremalReport:
        N, k, l = nkl
        params = ChainParams.from_sigma(N, self.sigma, self.omega0)
        return sup_inf_extension(params, AnalysisWindow(k, l, self.epsilon), self.horizon_periods, self.conv)


@dataclass
class RatioScan:
    epsilon: float
    reports: list[ExtremalReport]
    ratios: dict = field(default_factory=dict)  # (N, k, l) -> (ratio_sup, ratio_inf)
    c1: float = float("nan")
    c2: float = float("nan")
    c3: float = float("nan")
    c4: float = float("nan")

    @property
    def grid(self) -> list[tuple[int, int]]:
        return sorted({(N, l) for N, _, l in self.ratios})

    @property
    def sup_spread(self) -> float:
        return self.c2 / self.c1

    @property
    def inf_spread(self) -> float:
        return self.c3 / self.c4


LRule = Union[Callable[[int], Iterable[int]], dict, Iterable[int], None]


def _l_values(l_rule: LRule, N: int) -> list[int]:
    if l_rule is None:
        return pow2_l_rule(N)
    if callable(l_rule):
        return list(l_rule(N))
    if isinstance(l_rule, dict):
        return list(l_rule[N])
    return list(l_rule)


def scan_windows(N_ladder: Iterable[int], l_rule: LRule, epsilon: float, k_rule=None) -> list[tuple[int, int, int]]:
    tasks = []
    for N in N_ladder:
        for l in _l_values(l_rule, N):
            if l < 1 or l >= N or l > (1 - epsilon) * N:
                raise DomainError(f"l={l} outside the admissible range for N={N}, eps={epsilon}")
            ks = window_offsets(N, l, epsilon) if k_rule is None else list(k_rule(N, l, epsilon))
            for k in ks:
                AnalysisWindow(k, l, epsilon).check(N)
                tasks.append((N, k, l))
    return tasks


def theorem_ratio_scan(
    N_ladder: Iterable[int],
    l_rule: LRule = None,
    epsilon: float = 0.25,
    horizon_periods: float = DEFAULT_HORIZON_PERIODS,
    conv: Convention | str = Convention.CORRECTED,
    k_rule=None,
    omega0: float = 1.0,
    sigma: float = 1.0,
    mapper: Callable = map,
) -> RatioScan:
    """Measure sup I / F_N(l) and -inf I / F_N(l) over a grid of windows.

    c1 = min, c2 = max of the sup ratios; c4 = min, c3 = max of the inf ratios.
    """
    conv = as_convention(conv).value
    tasks = scan_windows(N_ladder, l_rule, epsilon, k_rule)
    reports = list(mapper(_WindowTask(omega0, sigma, epsilon, horizon_periods, conv), tasks))
    reports.sort(key=lambda r: (r.N, r.window.l, r.window.k))
    scan = RatioScan(epsilon=epsilon, reports=reports)
    for r in reports:
        scan.ratios[(r.N, r.window.k, r.window.l)] = (r.ratio_sup, r.ratio_inf)
    if reports:
        sup = [v[0] for v in scan.ratios.values()]
        inf = [v[1] for v in scan.ratios.values()]
        scan.c1, scan.c2 = min(sup), max(sup)
        scan.c4, scan.c3 = min(inf), max(inf)
    return scan


# Mode-coefficient facts, measured.

def curvature_constant_fit(N_values: Iterable[int], l_values: Iterable[int] = (1,), conv=Convention.CORRECTED) -> float:
    """max over N, l, m of |a_m| m^2 / N^2."""
    best = 0.0
    for N in N_values:
        m = np.arange(1, 2 * N - 1)
        for l in l_values:
            a = extension_coefficients(N, 0, l, conv).a_m
            best = max(best, float(np.max(np.abs(a) * m**2 / N**2)))
    return best


def harmonic_band(N_values: Iterable[int], l_values: Iterable[int], conv=Convention.CORRECTED) -> tuple[float, float]:
    """(min, max) of m |a_m| / (N l) over odd m <= N/l."""
    lo, hi = math.inf, 0.0
    for N in N_values:
        m = np.arange(1, 2 * N - 1)
        for l in l_values:
            a = extension_coefficients(N, 0, l, conv).a_m
            sel = (m % 2 == 1) & (m <= N / l)
            r = m[sel] * np.abs(a[sel]) / (N * l)
            lo, hi = min(lo, float(r.min())), max(hi, float(r.max()))
    return lo, hi


def alternation_constant(N_values: Iterable[int], epsilon: float) -> float:
    """min over admissible windows and odd m of m (|b_m|/m + |b_{m+2}|/(m+2))."""
    best = math.inf
    for N in N_values:
        m = np.arange(1, 2 * N, 2).astype(float)  # odd m up to 2N-1
        limit = (1 - epsilon) * N
        for l in range(1, int(limit) + 1):
            ks = np.arange(0, int(math.floor(limit - l + 1e-12)) + 1)
            if ks.size == 0:
                continue
            centre = (ks + l / 2.0)[:, None] / (2 * N - 1)
            b0 = np.abs(np.cos(np.pi * m[None, :] * centre))
            b2 = np.abs(np.cos(np.pi * (m[None, :] + 2) * centre))
            val = b0 + m[None, :] * b2 / (m[None, :] + 2)
            best = min(best, float(val.min()))
    return best


def even_mode_max(N: int, l: int = 1, conv=Convention.CORRECTED) -> float:
    """Largest |a_m| over even m (identically zero)."""
    a = extension_coefficients(N, 0, l, conv).a_m
    return float(np.max(np.abs(a[1::2])))


__all__ = [
    "f_N",
    "m_of_n",
    "ExtremalReport",
    "RatioScan",
    "sup_inf_extension",
    "torus_partial_sum_bound",
    "theorem_ratio_scan",
    "torus_lower_bound",
    "curvature_constant_bound",
    "curvature_constant_fit",
    "harmonic_band",
    "alternation_constant",
    "even_mode_max",
    "window_offsets",
    "pow2_l_rule",
    "sample_grid",
]
