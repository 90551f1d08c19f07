"""Invariant suites behind ``harmchain verify``, reported in TAP form.

Each check returns a ``Check``.  ``expected_fail`` marks documented failures
(the paper-literal dispersion convention); those are reported as TODO and do
not fail the suite as long as they do fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chain import AnalysisWindow, ChainParams, Convention, exact_displacements, gamma_identity_residual
from .extremal import (
    alternation_constant,
    even_mode_max,
    harmonic_band,
    sup_inf_extension,
    theorem_ratio_scan,
    torus_partial_sum_bound,
)
from .integrator import circle_equivalence_error, dissociation_run, spectral_vs_ode_error
from .numtheory import (
    euler_totient,
    integer_relation_search,
    primorials_upto,
    rational_independence_check,
    totient_liminf_scan,
)
from .phase import (
    DIVERGES,
    VANISHES,
    NoFixedPoint,
    ScalingFamily,
    critical_force_ratio,
    phase_sweep,
    static_fixed_point,
)
from .potentials import QuadraticPotential, mie_from_curvature

GAMMA_SIZES = (2, 3, 5, 17, 64, 257)
ODE_SIZES = (2, 5, 20, 50)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""
    expected_fail: bool = False

    @property
    def ok(self) -> bool:
        return self.passed != self.expected_fail


def closed_form_check() -> Check:
    t = np.linspace(0.0, 100.0, 20001)
    x = exact_displacements(ChainParams.from_sigma(2, 1.0), t)[:, 1]
    err = float(np.max(np.abs(x - (1 - np.cos(t)))))
    return Check("closed form N=2", err <= 1e-10, f"max err {err:.3g}")


def gamma_check(conv=Convention.CORRECTED, sizes=GAMMA_SIZES) -> Check:
    worst, where = 0.0, None
    for N in sizes:
        for n in range(N):
            r = gamma_identity_residual(N, n, conv) / max(1, n)
            if r > worst:
                worst, where = r, (N, n)
    if Convention(conv) is Convention.PAPER_LITERAL:
        r2 = gamma_identity_residual(2, 1, conv)
        return Check("gamma-sum identity (paper-literal)", r2 <= 1e-9, f"residual at N=2: {r2:.4g}", True)
    return Check("gamma-sum identity", worst <= 1e-9, f"worst scaled residual {worst:.3g} at {where}")


def ode_check(conv=Convention.CORRECTED, sizes=ODE_SIZES, T=100.0, dt=1e-3) -> Check:
    details, good = [], True
    for N in sizes:
        p = ChainParams.from_sigma(N, 1.0)
        e1 = spectral_vs_ode_error(p, T, dt, conv)
        e2 = spectral_vs_ode_error(p, T, dt / 2, conv)
        ratio = e1 / e2 if e2 > 0 else math.inf
        good &= e1 <= 1e-5 and ratio >= 3.5
        details.append(f"N={N}: {e1:.2e} x{ratio:.2f}")
    name = "spectral-ODE agreement"
    if Convention(conv) is Convention.PAPER_LITERAL:
        return Check(name + " (paper-literal)", good, "; ".join(details), True)
    return Check(name, good, "; ".join(details))


def circle_check() -> Check:
    c = circle_equivalence_error(ChainParams.from_sigma(5, 1.0), 50.0, 1e-3)
    good = c.error <= 1e-6 and c.antisymmetry <= 1e-9 and c.mirror <= 1e-9
    return Check("circle equivalence N=5", good, f"err {c.error:.2e}, sym {c.antisymmetry:.1e}/{c.mirror:.1e}")


def mode_coefficient_check() -> Check:
    even = max(even_mode_max(N, l) for N in (50, 100, 200) for l in (1, 4, 16))
    lo, hi = harmonic_band((50, 100, 200), (1, 2, 4, 8, 16))
    cs = [alternation_constant((50, 100, 200), eps) for eps in (0.1, 0.25, 0.5)]
    good = even == 0.0 and 0 < lo <= hi < math.inf and min(cs) > 0
    return Check("mode-coefficient estimates", good, f"even max {even}, band [{lo:.4f}, {hi:.4f}], c(eps) {min(cs):.3g}")


def torus_check(horizons=(50, 500, 5000)) -> Check:
    rel = rational_independence_check(8, 3, 5)
    if rel.found:
        return Check("torus sandwich N=8", False, f"relation {rel.coefficients}")
    p = ChainParams.from_sigma(8, 1.0)
    worst, good = math.inf, True
    for k in range(6):
        for l in range(1, 7 - k):
            head, tail = torus_partial_sum_bound(8, k, l, 3)
            _, exact_tail = torus_partial_sum_bound(8, k, l, 3, tail="exact")
            sups = [sup_inf_extension(p, AnalysisWindow(k, l, 0.25), H).sup_lower for H in horizons]
            good &= sups[-1] >= 0.99 * (head - tail) and max(sups) <= head + tail + 1e-12
            good &= sups[-1] >= 0.99 * (head - exact_tail) and max(sups) <= head + exact_tail + 1e-12
            worst = min(worst, sups[-1] / (head - exact_tail))
    return Check("torus sandwich N=8", good, f"min sup/(head - exact tail) {worst:.4f}")


def ratio_band_check(ladder=(64, 128, 256, 512)) -> Check:
    scan = theorem_ratio_scan(ladder, epsilon=0.25)
    vals = [v for pair in scan.ratios.values() for v in pair]
    good = min(vals) > 0 and scan.sup_spread <= 20 and scan.inf_spread <= 20
    return Check("log-excess ratio band", good, f"c1..c4 {scan.c1:.4f} {scan.c2:.4f} {scan.c3:.4f} {scan.c4:.4f}")


def phase_check(ladder=(64, 128, 256, 512)) -> Check:
    v = phase_sweep(ScalingFamily(0.01, 1.0, 2.0), ladder)
    d = phase_sweep(ScalingFamily(0.01, 1.0, 0.0), ladder)
    good = v.classification == VANISHES and d.classification == DIVERGES
    return Check("phase dichotomy", good, f"{v.classification} / {d.classification}, slope {d.slope:.4g}")


def statics_check() -> Check:
    crit = critical_force_ratio(6, 12)
    N, kappa = 20, 1.0
    pot = mie_from_curvature(kappa, N, 6, 12)
    f_star = kappa * crit.value / N
    grid = np.linspace(0.5 * f_star, 1.5 * f_star, 100)
    exists = np.array([static_fixed_point(pot, f) is not NoFixedPoint for f in grid])
    flip = bool(np.all(exists == (grid <= f_star * (1 + 1e-12))))
    quad = QuadraticPotential(2.0, 0.1)
    h_ok = static_fixed_point(quad, 0.3) == 0.1 + 0.3 / 2.0
    good = abs(crit.value - 0.03737) <= 1e-4 and crit.mismatch and abs(crit.printed - 0.0459) < 5e-4 and flip and h_ok
    return Check("Mie statics", good, f"C {crit.value:.6f}, printed {crit.printed:.4f}")


def dissociation_check(T=1000.0) -> Check:
    N, kappa = 20, 1.0
    pot = mie_from_curvature(kappa, N, 6, 12)
    f_star = kappa * pot.C / N
    low = dissociation_run(pot, N, 0.5 * f_star, T)
    high = dissociation_run(pot, N, 2.0 * f_star, T)
    good = low.verdict == "bound" and high.verdict == "dissociated"
    return Check("dynamic dissociation N=20", good, f"{low.verdict} / {high.verdict}")


def number_theory_check(limit=10**6) -> Check:
    brute = all(euler_totient(n) == sum(math.gcd(n, j) == 1 for j in range(1, n + 1)) for n in range(1, 401))
    scan = totient_liminf_scan(limit)
    last_n, last_v = scan[-1]
    at_primorial = set(n for n, _ in scan) <= set(primorials_upto(limit))
    rel = integer_relation_search([math.sin(math.pi / 6)], 2, 1e-12)
    none8 = not rational_independence_check(8, 3, 5).found
    good = brute and 0.44 <= last_v <= 0.57 and at_primorial and rel.coefficients == (1, 2) and none8
    return Check("number theory", good, f"liminf {last_v:.4f} at {last_n}")


SUITES: dict[str, list[Callable[[], Check]]] = {
    "quick": [closed_form_check, gamma_check, circle_check, statics_check, lambda: number_theory_check(10**5)],
    "full": [
        closed_form_check,
        gamma_check,
        ode_check,
        circle_check,
        mode_coefficient_check,
        torus_check,
        ratio_band_check,
        phase_check,
        statics_check,
        dissociation_check,
        number_theory_check,
    ],
    "paper-literal": [
        lambda: gamma_check(Convention.PAPER_LITERAL),
        lambda: ode_check(Convention.PAPER_LITERAL, sizes=(2, 20)),
        statics_check,
    ],
}


def run_suite(name: str, emit: Callable[[str], None] = print) -> bool:
    """Run a suite, streaming TAP lines to ``emit``; True if every check is ok."""
    if name not in SUITES:
        raise KeyError(name)
    checks = SUITES[name]
    emit("TAP version 13")
    emit(f"1..{len(checks)}")
    all_ok = True
    for i, fn in enumerate(checks, 1):
        c = fn()
        all_ok &= c.ok
        status = "ok" if c.ok else "not ok"
        if c.expected_fail:
            tag = "TODO expected-fail" if not c.passed else "TODO unexpectedly passed"
            emit(f"{'not ok' if not c.passed else 'ok'} {i} - {c.name} # {tag}: {c.detail}")
            if c.passed:
                emit(f"# {c.name} was documented as failing but passed")
        else:
            emit(f"{status} {i} - {c.name} # {c.detail}")
    return all_ok
