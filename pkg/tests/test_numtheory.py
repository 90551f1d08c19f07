import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from harmchain.chain import Convention
from harmchain.errors import DomainError
from harmchain.numtheory import (
    LIMINF_TARGET,
    RelationResult,
    euler_totient,
    exact_residual,
    frequency_ratios,
    integer_relation_search,
    primes_upto,
    primorials_upto,
    rational_independence_check,
    totient_liminf_scan,
    totient_sieve,
)
from oracles import brute_totient, normalised_totient, relation_value


def test_totient_examples():
    assert euler_totient(1) == 1
    assert euler_totient(12) == 4 == brute_totient(12)
    for p in primes_upto(97):
        assert euler_totient(p) == p - 1
    assert primes_upto(97)[-1] == 97 and len(primes_upto(97)) == 25
    for bad in (0, -3, 2.5):
        with pytest.raises(DomainError):
            euler_totient(bad)


def test_totient_brute_and_sieve():
    sieve = totient_sieve(3000)
    for n in range(1, 3001):
        assert euler_totient(n) == brute_totient(n) == sieve[n]


@given(st.integers(1, 1000), st.integers(1, 1000))
def test_multiplicative(a, b):
    assume(math.gcd(a, b) == 1)
    assert euler_totient(a * b) == euler_totient(a) * euler_totient(b)


def test_primorials():
    assert primorials_upto(10**6) == [2, 6, 30, 210, 2310, 30030, 510510]


@pytest.fixture(scope="module")
def scan():
    return totient_liminf_scan(10**6)


def test_liminf_scan(scan):
    ns = [n for n, _ in scan]
    assert set(ns) <= set(primorials_upto(10**6))
    value = dict(scan)
    assert value[30030] == pytest.approx(0.4475, abs=1e-4)
    assert value[30030] == pytest.approx(normalised_totient(30030), rel=1e-12)
    assert 0.44 <= scan[-1][1] <= 0.57 and scan[-1][1] < LIMINF_TARGET
    # the record lows of phi(n)/n themselves decrease
    ratios = [v / math.log(math.log(n)) for n, v in scan]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_primes_exceed_next_primorial(scan):
    rec = [(n, v) for n, v in scan if n > math.e**math.e]
    for p in primes_upto(30030)[::97]:
        if p <= math.e**math.e:
            continue
        nxt = next(v for n, v in rec if n > p)
        assert normalised_totient(p) > nxt


def test_scan_limit():
    with pytest.raises(DomainError):
        totient_liminf_scan(9)


def test_frequency_ratios():
    assert frequency_ratios(2, 1).tolist() == pytest.approx([0.5], rel=1e-15)
    assert frequency_ratios(2, 1, Convention.PAPER_LITERAL)[0] == pytest.approx(0.258819045102521, rel=1e-14)
    v = frequency_ratios(40, 78)
    assert np.all(np.diff(v) > 0) and np.all((v > 0) & (v < 1))
    with pytest.raises(DomainError):
        frequency_ratios(4, 7)


# --- relation search ---

def test_half():
    r = integer_relation_search([0.5], 2, 1e-12)
    assert r.found and r.coefficients == (1, 2) and r.residual == 0.0 and r.verdict == "relation"


def test_pentagon_relation():
    v = [math.sin(math.pi / 10), math.sin(3 * math.pi / 10)]
    r = integer_relation_search(v, 2, 1e-10)
    assert r.found and r.coefficients == (1, -2, 2)
    assert abs(relation_value(r.coefficients, [mp.mpf(1) / 10, mp.mpf(3) / 10])) < 1e-45


def test_heptagon_relation_exists():
    # cos(pi/7) - cos(2pi/7) + cos(3pi/7) = 1/2, so an exact relation is within B = 5
    v = [math.sin(math.pi / 14), math.sin(3 * math.pi / 14), math.sin(5 * math.pi / 14)]
    r = integer_relation_search(v, 5, 1e-10)
    assert r.found and r.coefficients == (1, 2, -2, 2)
    assert abs(relation_value(r.coefficients, [mp.mpf(q) / 14 for q in (1, 3, 5)])) < 1e-45


def test_independence_examples():
    assert rational_independence_check(8, 3, 5).verdict == "no-relation-found"
    assert rational_independence_check(2, 1, 2).coefficients == (1, 2)
    assert not rational_independence_check(2, 1, 1).found


def test_refusal_and_errors():
    with pytest.raises(DomainError):
        integer_relation_search(np.linspace(0.1, 0.9, 8), 10)
    with pytest.raises(DomainError):
        integer_relation_search([], 2)
    with pytest.raises(DomainError):
        integer_relation_search([0.3], 0)
    with pytest.raises(DomainError):
        integer_relation_search([0.3], 2, 0.0)


def test_not_all_zero_and_normalised():
    r = integer_relation_search([0.25, 0.75], 3, 1e-12)
    assert r.found and any(r.coefficients[1:])
    lead = next(x for x in r.coefficients if x != 0)
    assert lead > 0


@settings(max_examples=30)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=2), st.data())
def test_completeness_on_planted_relation(xs, data):
    B = 3
    coeffs = [data.draw(st.integers(-B, B)) for _ in xs]
    lead = data.draw(st.sampled_from([-1, 1]))
    a0 = data.draw(st.integers(-B, B))
    last = (a0 - sum(c * x for c, x in zip(coeffs, xs))) / lead
    values = xs + [last]
    r = integer_relation_search(values, B, 1e-9)
    assert r.found
    # soundness in extended precision
    a0r, rest = r.coefficients[0], r.coefficients[1:]
    exact = mp.fsum(mp.mpf(a) * mp.mpf(v) for a, v in zip(rest, values)) - a0r
    assert abs(float(exact)) <= 10 * 1e-9


def test_exact_residual():
    assert exact_residual([0.5, 0.25], (1, 1, 2)) == 0.0
    # binary64 0.1 is slightly above 1/10: the residual is exact, not rounded to zero
    assert exact_residual([0.1], (1, 10)) == float(abs(Fraction(0.1) * 10 - 1)) > 0


def test_lexicographic_tie_break():
    # both (0, 1, -1) and (0, 2, -2) vanish on equal values; the smaller vector wins
    r = integer_relation_search([0.3, 0.3], 2, 1e-12)
    assert r.coefficients == (0, 1, -1)
    assert RelationResult(False).verdict == "no-relation-found"


def test_float_search_resolution_floor_at_large_n():
    # ratios crowd towards small integers; a tolerance hit is not an exact relation
    res = rational_independence_check(128, 3, 5)
    assert res.found and res.coefficients == (0, 5, -4, 1)
    assert res.residual <= 1e-10
    exact = abs(relation_value((0, 5, -4, 1), [mp.mpf(m) / 510 for m in (1, 2, 3)]))
    assert exact > 1e-12
