import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harmchain.chain import (
    AnalysisWindow,
    ChainParams,
    Convention,
    deviation_sum,
    exact_displacement,
    exact_displacements,
    exact_velocities,
    extension_coefficients,
    extension_deviation,
    gamma_coefficient,
    gamma_coefficients,
    gamma_identity_residual,
    mode_data,
    mode_frequencies,
    mode_frequency,
)
from harmchain.errors import DomainError
from oracles import eigen_displacements, eigen_frequencies

CORR, LIT = Convention.CORRECTED, Convention.PAPER_LITERAL


# --- parameters and windows ---

def test_sigma_is_f0_over_omega0_squared():
    p = ChainParams(N=7, omega0=1.7, f0=0.3)
    assert p.sigma == 0.3 / 1.7**2


def test_from_physical_folds_mass():
    p = ChainParams.from_physical(5, kappa=4.0, mass=2.0, f=3.0, a=0.5)
    assert p.omega0 == math.sqrt(2.0) and p.f0 == 1.5 and p.a == 0.5
    assert p.sigma == pytest.approx(3.0 / 4.0, rel=1e-15)


@pytest.mark.parametrize("kw", [dict(N=1), dict(N=3, omega0=0), dict(N=3, f0=-1), dict(N=3, a=0), dict(N=2.5)])
def test_invalid_params(kw):
    with pytest.raises(DomainError):
        ChainParams(**kw)


def test_window_rules():
    AnalysisWindow(0, 3, 0.25).check(4)
    with pytest.raises(DomainError):
        AnalysisWindow(1, 3, 0.25).check(4)
    for bad in [(0, 1, 0.0), (0, 1, 1.0), (-1, 1, 0.5), (0, 0, 0.5)]:
        with pytest.raises(DomainError):
            AnalysisWindow(*bad)


# --- dispersion ---

def test_mode_frequency_examples():
    assert mode_frequency(5, 1.0, 0) == 0.0
    assert mode_frequency(2, 1.0, 1) == pytest.approx(1.0, abs=1e-15)
    assert mode_frequency(5, 1.0, 9) == 2.0
    assert mode_frequency(2, 1.0, 1, LIT) == pytest.approx(0.2588190451025208 * 2, rel=1e-15)


@pytest.mark.parametrize("m", [-1, 18])
def test_mode_frequency_range(m):
    with pytest.raises(DomainError):
        mode_frequency(5, 1.0, m)


@given(st.integers(2, 300), st.floats(0.1, 10), st.sampled_from([CORR, LIT]))
def test_frequencies_positive_increasing(N, w0, conv):
    w = mode_data(N, w0, conv).omegas
    assert w.shape == (2 * N - 2,)
    assert np.all(w > 0) and np.all(np.diff(w) > 0)
    assert not w.flags.writeable


@pytest.mark.parametrize("N", [2, 3, 6, 25])
def test_odd_modes_are_chain_eigenfrequencies(N):
    w = mode_frequencies(N)
    assert np.allclose(w[::2], eigen_frequencies(N), rtol=1e-12, atol=1e-14)


# --- gamma coefficients ---

def test_gamma_examples():
    assert gamma_coefficient(2, 1, 2) == 0.0
    assert gamma_coefficient(2, 1, 2, LIT) == 0.0
    assert gamma_coefficient(2, 1, 1) == pytest.approx(3.0, rel=1e-14)
    assert gamma_coefficient(2, 0, 1) == 0.0


def test_gamma_residual_examples():
    assert gamma_identity_residual(2, 1) <= 1e-12
    assert gamma_identity_residual(2, 0) == 0.0
    # paper-literal at N=2, evaluated independently at 50 digits
    d = lambda m: mp.sin(mp.pi * m / 12)
    g = [mp.sin(mp.pi * m / 2) * mp.cos(mp.pi * m / 6) * mp.sin(mp.pi * m / 3) / d(m) ** 2 for m in (1, 2)]
    expected = float(abs(mp.fsum(g) / 3 - 1))
    assert gamma_identity_residual(2, 1, LIT) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.732, abs=1e-3)


@pytest.mark.parametrize("N", [2, 3, 5, 17, 64, 257])
def test_gamma_sum_identity(N):
    worst = max(gamma_identity_residual(N, n) / max(1, n) for n in range(N))
    assert worst <= 1e-9


@given(st.integers(2, 200), st.data())
def test_even_modes_vanish(N, data):
    n = data.draw(st.integers(0, N - 1))
    g = gamma_coefficients(N, n)
    assert np.all(g[1::2] == 0.0)


# --- displacements ---

def test_displacement_examples():
    p = ChainParams.from_sigma(2, 1.0)
    assert exact_displacement(p, 1, math.pi) == pytest.approx(2.0, abs=1e-12)
    assert exact_displacement(p, 0, 3.3) == 0.0


@given(st.integers(2, 40), st.floats(0.01, 3), st.floats(0.2, 5), st.floats(0, 200))
def test_displacements_match_eigen_oracle(N, sigma, w0, t):
    p = ChainParams.from_sigma(N, sigma, w0)
    x = exact_displacements(p, t)
    ref = eigen_displacements(N, sigma, w0, [t])[0]
    assert np.allclose(x, ref, rtol=0, atol=1e-10 * sigma * N)


@given(st.integers(2, 60), st.floats(0, 5))
def test_boundary_and_initial(N, sigma):
    p = ChainParams.from_sigma(N, sigma)
    assert np.all(np.abs(exact_displacements(p, 0.0)) <= 1e-12 * max(sigma, 1) * N)
    assert np.all(exact_displacements(p, np.linspace(0, 40, 50))[:, 0] == 0.0)


def test_velocity_is_derivative():
    p = ChainParams.from_sigma(9, 0.4, 1.3)
    t, h = 2.7, 1e-5
    fd = (exact_displacements(p, t + h) - exact_displacements(p, t - h)) / (2 * h)
    assert np.allclose(exact_velocities(p, t), fd, atol=1e-8)


def test_shapes():
    p = ChainParams.from_sigma(4, 1.0)
    assert exact_displacements(p, 1.0).shape == (4,)
    assert exact_displacements(p, [1.0, 2.0]).shape == (2, 4)
    assert exact_displacement(p, 2, [1.0, 2.0]).shape == (2,)
    with pytest.raises(DomainError):
        exact_displacement(p, 4, 1.0)


# --- extension coefficients and deviation ---

def test_extension_coefficients_N2():
    ec = extension_coefficients(2, 0, 1)
    assert ec.a_m[0] == pytest.approx(math.sqrt(3), rel=1e-14)
    assert ec.b_m[0] == pytest.approx(math.sqrt(3) / 2, rel=1e-14)
    assert ec.a_m[1] == 0.0
    assert -2 / 3 * ec.a_m[0] * ec.b_m[0] == pytest.approx(-1.0, rel=1e-14)


def test_extension_window_errors():
    with pytest.raises(DomainError):
        extension_coefficients(5, 2, 3)
    with pytest.raises(DomainError):
        extension_coefficients(8, 4, 3, epsilon=0.25)


@given(st.integers(3, 150), st.data())
def test_coefficient_invariants(N, data):
    l = data.draw(st.integers(1, N - 1))
    k = data.draw(st.integers(0, N - 1 - l))
    ec = extension_coefficients(N, k, l)
    assert np.all(ec.a_m[1::2] == 0.0)
    assert np.all(np.abs(ec.b_m) <= 1.0)


def test_deviation_examples():
    p = ChainParams.from_sigma(2, 1.0)
    assert extension_deviation(p, 0, 1, math.pi) == pytest.approx(1.0, abs=1e-12)
    p = ChainParams.from_sigma(30, 0.2)
    for k, l in [(0, 1), (3, 7), (10, 19)]:
        assert extension_deviation(p, k, l, 0.0) == pytest.approx(-l, abs=1e-10 * l)


@settings(max_examples=100)
@given(st.integers(2, 80), st.floats(0.05, 4), st.floats(0.3, 3), st.floats(0, 500), st.data())
def test_two_paths_agree(N, sigma, w0, t, data):
    l = data.draw(st.integers(1, N - 1))
    k = data.draw(st.integers(0, N - 1 - l))
    p = ChainParams.from_sigma(N, sigma, w0)
    a = extension_deviation(p, k, l, t)
    b = extension_deviation(p, k, l, t, via="displacements")
    scale = max(1.0, deviation_sum(p, k, l).abs_sum())
    assert abs(a - b) <= 1e-9 * scale


@given(st.integers(2, 80), st.floats(0, 1e4), st.data())
def test_deviation_triangle_bound(N, t, data):
    l = data.draw(st.integers(1, N - 1))
    k = data.draw(st.integers(0, N - 1 - l))
    S = deviation_sum(N, k, l)
    assert abs(S(t)) <= S.abs_sum() * (1 + 1e-12)


def test_cosine_grid_matches_direct():
    S = deviation_sum(40, 3, 5)
    dt, n = 0.0371, 10_000
    direct = S(np.arange(n) * dt)
    assert np.allclose(S.grid(dt, n, chunk=997), direct, atol=1e-11)


def test_unknown_route():
    with pytest.raises(DomainError):
        extension_deviation(ChainParams.from_sigma(3, 1.0), 0, 1, 0.0, via="nope")
