"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``PASS``/``FAIL`` line (visible with ``-s`` or in
the captured output of ``pytest -v -rA``) before asserting.
"""
import math
import time

import numpy as np
import pytest

from harmchain.chain import AnalysisWindow, ChainParams, Convention, exact_displacements, gamma_identity_residual
from harmchain.extremal import (
    alternation_constant,
    even_mode_max,
    harmonic_band,
    sup_inf_extension,
    theorem_ratio_scan,
    torus_partial_sum_bound,
)
from harmchain.integrator import circle_equivalence_error, dissociation_run, spectral_vs_ode_error
from harmchain.numtheory import (
    euler_totient,
    integer_relation_search,
    primorials_upto,
    rational_independence_check,
    totient_liminf_scan,
)
from harmchain.phase import (
    DIVERGES,
    SLOPE_STABILITY,
    VANISHES,
    NoFixedPoint,
    ScalingFamily,
    critical_force_ratio,
    phase_sweep,
    static_fixed_point,
)
from harmchain.potentials import QuadraticPotential, mie_from_curvature
from oracles import mie_critical_ratio

pytestmark = pytest.mark.slow

# criterion 7 band, measured over the full grid and frozen
FROZEN_C = {"c1": 0.22448612140101248, "c2": 0.9582330521546698, "c3": 0.960051446345927, "c4": 0.22604784314690615}
FROZEN_TOL = 1e-6


def report(n, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module", autouse=True)
def warm_compiled_kernels():
    # compiled integrator kernels are cached on disk; exclude first-call compilation from timings
    spectral_vs_ode_error(ChainParams.from_sigma(2, 1.0), 0.01, 1e-3)
    circle_equivalence_error(ChainParams.from_sigma(2, 1.0), 0.01, 1e-3)


def test_criterion_01_closed_form():
    t0 = time.perf_counter()
    t = np.linspace(0.0, 100.0, 100_001)
    x = exact_displacements(ChainParams.from_sigma(2, 1.0), t)[:, 1]
    err = float(np.max(np.abs(x - (1 - np.cos(t)))))
    elapsed = time.perf_counter() - t0
    report(1, err <= 1e-10 and elapsed < 1.0, f"N=2 closed form max err {err:.2e}, {elapsed:.2f}s")


def test_criterion_02_spectral_vs_ode():
    t0 = time.perf_counter()
    parts, ok = [], True
    for N in (2, 5, 20, 50):
        p = ChainParams.from_sigma(N, 1.0)
        e1 = spectral_vs_ode_error(p, 100.0, 1e-3)
        e2 = spectral_vs_ode_error(p, 100.0, 5e-4)
        ok &= e1 <= 1e-5 and e1 / e2 >= 3.5
        parts.append(f"N={N} {e1:.2e} x{e1 / e2:.2f}")
    elapsed = time.perf_counter() - t0
    report(2, ok and elapsed < 30, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_03_circle():
    c = circle_equivalence_error(ChainParams.from_sigma(5, 1.0), 50.0, 1e-3)
    ok = c.error <= 1e-6 and c.antisymmetry <= 1e-9 and c.mirror <= 1e-9
    report(3, ok, f"N=5 err {c.error:.2e}, symmetry {c.antisymmetry:.1e}, {c.mirror:.1e}")


def test_criterion_04_gamma_identity():
    worst = max(
        gamma_identity_residual(N, n) / max(1, n) for N in (2, 3, 5, 17, 64, 257) for n in range(N)
    )
    literal = gamma_identity_residual(2, 1, Convention.PAPER_LITERAL)
    report(4, worst <= 1e-9 and literal > 1, f"corrected worst {worst:.2e}; paper-literal N=2 {literal:.3f} (expected-fail)")


def test_criterion_05_coefficient_estimates():
    even = max(even_mode_max(N, l) for N in (50, 100, 200) for l in (1, 2, 4, 8, 16, 25))
    b_ok = all(
        np.all(np.abs(np.cos(np.pi * np.arange(1, 2 * N - 1) * (k + l / 2) / (2 * N - 1))) <= 1)
        for N in (50, 100, 200) for k, l in [(0, 1), (10, 7), (30, 19)]
    )
    lo, hi = harmonic_band((50, 100, 200), (1, 2, 4, 8, 16))
    cs = {eps: alternation_constant((50, 100, 200), eps) for eps in (0.1, 0.25, 0.5)}
    ok = even == 0.0 and b_ok and 0 < lo < hi and all(c > 0 for c in cs.values())
    report(5, ok, f"even {even}, band [{lo:.4f}, {hi:.4f}], c(eps) " + ", ".join(f"{e}:{c:.4g}" for e, c in cs.items()))


def test_criterion_06_torus_sandwich():
    t0 = time.perf_counter()
    rel = rational_independence_check(8, 3, 5)
    assert not rel.found
    p = ChainParams.from_sigma(8, 1.0)
    ok, worst = True, math.inf
    for k in range(6):
        for l in range(1, 7 - k):
            head, tail = torus_partial_sum_bound(8, k, l, 3)
            _, exact_tail = torus_partial_sum_bound(8, k, l, 3, tail="exact")
            sups = [sup_inf_extension(p, AnalysisWindow(k, l, 0.25), H).sup_lower for H in (50, 500, 5000)]
            ok &= all(b >= a - 1e-12 for a, b in zip(sups, sups[1:]))
            for tl in (tail, exact_tail):
                ok &= sups[-1] >= 0.99 * (head - tl) and max(sups) <= head + tl + 1e-12
            worst = min(worst, sups[-1] / (head - exact_tail))
    elapsed = time.perf_counter() - t0
    report(6, ok and elapsed < 60, f"N=8 M=3 windows, min sup/(head-exact tail) {worst:.4f}, {elapsed:.1f}s")


def test_criterion_07_theorem_band():
    t0 = time.perf_counter()
    scan = theorem_ratio_scan([64, 128, 256, 512], epsilon=0.25)
    elapsed = time.perf_counter() - t0
    vals = [v for pair in scan.ratios.values() for v in pair]
    got = {"c1": scan.c1, "c2": scan.c2, "c3": scan.c3, "c4": scan.c4}
    frozen = all(abs(got[k] - FROZEN_C[k]) <= FROZEN_TOL * FROZEN_C[k] for k in got)
    ok = min(vals) > 0 and scan.sup_spread <= 20 and scan.inf_spread <= 20 and frozen and elapsed < 300
    report(7, ok, f"{len(scan.ratios)} windows, c1..c4 " + " ".join(f"{got[k]:.4f}" for k in sorted(got))
           + f", spreads {scan.sup_spread:.2f}/{scan.inf_spread:.2f}, {elapsed:.1f}s")


def test_criterion_08_phase_dichotomy():
    ladder = [64, 128, 256, 512, 1024]
    v = phase_sweep(ScalingFamily(0.01, 1.0, 2.0), ladder)
    d = phase_sweep(ScalingFamily(0.01, 1.0, 0.0), ladder)
    mean = float(np.mean(d.local_slopes))
    stable = mean > 0 and all(abs(s - mean) <= SLOPE_STABILITY * mean for s in d.local_slopes)
    ok = v.classification == VANISHES and d.classification == DIVERGES and d.slope > 0 and stable
    report(8, ok, f"{v.classification} / {d.classification}; slope {d.slope:.4g}, local "
           + ", ".join(f"{s:.4g}" for s in d.local_slopes))


def test_criterion_09_statics():
    crit = critical_force_ratio(6, 12)
    oracle = mie_critical_ratio(6, 12)
    N, kappa = 20, 1.0
    pot = mie_from_curvature(kappa, N, 6, 12)
    f_star = kappa * crit.value / N
    grid = np.linspace(0.0, 2.0 * f_star, 100)
    exists = np.array([static_fixed_point(pot, f) is not NoFixedPoint for f in grid])
    flip = bool(np.array_equal(exists, grid <= f_star)) and exists.any() and not exists.all()
    h_ok = all(static_fixed_point(QuadraticPotential(k, a), f) == a + f / k for k, a, f in [(1, 1, 0.3), (2.5, 0.2, 0.7)])
    ok = (abs(crit.value - 0.03737) <= 1e-4 and abs(crit.value - oracle) <= 1e-10 * oracle
          and abs(crit.printed - 0.0459) <= 1e-4 and crit.mismatch and flip and h_ok)
    report(9, ok, f"C {crit.value:.6f} (oracle {oracle:.6f}), printed {crit.printed:.4f} mismatch={crit.mismatch}")


def test_criterion_10_dissociation():
    N, kappa = 20, 1.0
    pot = mie_from_curvature(kappa, N, 6, 12)
    f_star = kappa * critical_force_ratio(6, 12).value / N
    low = dissociation_run(pot, N, 0.5 * f_star, 1000.0)
    high = dissociation_run(pot, N, 2.0 * f_star, 1000.0)
    ok = low.verdict == "bound" and high.verdict == "dissociated"
    report(10, ok, f"0.5x: {low.verdict} (max gap {low.max_gap / pot.b:.3f} b), 2x: {high.verdict}")


def test_criterion_11_number_theory():
    brute = all(
        euler_totient(n) == int(np.count_nonzero(np.gcd(np.arange(1, n + 1), n) == 1)) for n in range(1, 10_001)
    )
    scan = totient_liminf_scan(10**6)
    last_n, last_v = scan[-1]
    at_primorial = last_n in primorials_upto(10**6)
    half = integer_relation_search([math.sin(math.pi / 6)], 2, 1e-10)
    none8 = rational_independence_check(8, 3, 5, 1e-10)
    ok = brute and 0.44 <= last_v <= 0.57 and at_primorial and half.found and half.coefficients == (1, 2) and not none8.found
    report(11, ok, f"phi brute n<=1e4 {brute}; liminf {last_v:.4f} at {last_n}; 2 sin(pi/6)=1 {half.coefficients}; N=8 {none8.verdict}")
