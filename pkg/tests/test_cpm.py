import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from scipy import integrate

from holocrit.cpm import (
    SignedMonomialSum,
    c_of_n,
    chern_check,
    chern_polynomial,
    cpm_expected_number,
    cpm_total,
    expand_integrand,
    gap_coefficients,
    ordered_region_integral,
    series_expand,
)
from holocrit.rational import parse_rational


def test_expand_integrand_examples():
    assert expand_integrand(1, 1).terms == [(1, (1,))]
    assert expand_integrand(1, 0).terms == [(-1, (1,))]
    assert expand_integrand(2, 2) == SignedMonomialSum(2, {(2, 1): 1, (1, 2): -1})


def test_expand_integrand_term_count_bound():
    for m in range(1, 5):
        assert len(expand_integrand(m, m)) <= math.factorial(m) * 2 ** (m * (m - 1) // 2)


def test_expand_integrand_evaluates_to_abs_product_times_vandermonde():
    rng = np.random.default_rng(0)
    for m in (2, 3, 4):
        for p in range(m + 1):
            lam = np.concatenate([np.sort(rng.random(p))[::-1] + 0.1, -np.sort(rng.random(m - p)) - 0.1])
            want = abs(np.prod(lam)) * math.prod(lam[i] - lam[j] for i in range(m) for j in range(i + 1, m))
            assert expand_integrand(m, p).evaluate(lam) == pytest.approx(want, rel=1e-10)


def test_region_integral_examples():
    assert ordered_region_integral((1,), 1, 1) == 1
    # raw monomial lambda_1 is negative on the region; expand_integrand supplies the -1
    assert ordered_region_integral((1,), 1, 0) == -parse_rational("N^2/(4*(N-1)^2)")
    assert ordered_region_integral((1,), 1, 0, Fraction(3)) == Fraction(-1, 4)


def test_region_integral_2d_oracle():
    t1, t2 = sympy.symbols("t1 t2", positive=True)
    want = sympy.integrate((t1 + t2) ** 2 * t2 * sympy.exp(-t1 - 2 * t2), (t1, 0, sympy.oo), (t2, 0, sympy.oo))
    got = ordered_region_integral((2, 1), 2, 2)
    assert got == parse_rational(str(want))
    assert want == sympy.Rational(11, 8)


def _quad_region(exps, m, p, c):
    """Direct quadrature over the ordered region in the original coordinates."""
    def integrand(*lam):
        lam = lam[::-1]  # nquad passes the innermost variable first
        w = -sum(lam) + (c * lam[-1] if p < m else 0.0)
        return math.prod(x**a for x, a in zip(lam, exps)) * math.exp(w)

    def bounds(i):
        def b(*outer):
            outer = outer[::-1]  # outer[k] = lam_k for k < i
            if i < p:
                lo = 0.0
                hi = outer[i - 1] if i > 0 else np.inf
            else:
                hi = 0.0 if i == p else outer[i - 1]
                lo = -np.inf
            return (lo, hi)
        return b

    ranges = [bounds(i) for i in range(m)][::-1]
    val, _ = integrate.nquad(integrand, ranges, opts={"epsabs": 1e-13, "epsrel": 1e-11, "limit": 200})
    return val


def test_region_integral_matches_quadrature_at_c_3_7():
    rng = np.random.default_rng(37)
    c = Fraction(37, 10)
    done = 0
    while done < 20:
        m = int(rng.integers(1, 4))
        if m == 3 and done % 3:
            m = 2
        p = int(rng.integers(0, m + 1))
        exps = tuple(int(x) for x in rng.integers(0, 3, m))
        exact = float(ordered_region_integral(exps, m, p, c))
        approx = _quad_region(exps, m, p, float(c))
        assert approx == pytest.approx(exact, rel=1e-8), (exps, m, p)
        done += 1


def test_divergent_direction_raises():
    with pytest.raises(ValueError):
        ordered_region_integral((1, 1), 2, 0, Fraction(1))


def test_numeric_and_symbolic_agree():
    for m, p in ((2, 0), (2, 1), (3, 1)):
        exps = tuple([1] * m)
        sym = ordered_region_integral(exps, m, p)
        for n in (2, 3, 7):
            assert sym(n) == ordered_region_integral(exps, m, p, c_of_n(m)(n))


def test_gap_coefficients_positive_block_only():
    # int_{l1 > 0} l1 e^-l1 = 1
    assert gap_coefficients((1,), 1, 1) == {(): 1}


@pytest.mark.parametrize(
    "m,q,text",
    [
        (1, 1, "4*(N-1)^2/(3*N-2)"),
        (1, 2, "N^2/(3*N-2)"),
        (2, 2, "3*(N-1)^3/(2*N-1)"),
        (2, 3, "16*(N-1)^3*N^2/(3*N-2)^3"),
        (3, 5, "256*(N-1)^4*N^5/((5*N-2)*(3*N-2)^5)"),
        (4, 4, "5*(N-1)^5/(3*N-1)"),
        (4, 7, "4096*(N-1)^5*N^9*(109*N^2-102*N+24)/((5*N-2)^5*(3*N-2)^7)"),
    ],
)
def test_expected_numbers(m, q, text):
    got = cpm_expected_number(m, q)
    assert str(got) == str(parse_rational(text))
    assert got.valid_from == 2


def test_totals():
    assert cpm_total(1) == parse_rational("(5*N^2-8*N+4)/(3*N-2)")
    assert cpm_total(2) == parse_rational("(59*N^5-231*N^4+375*N^3-310*N^2+132*N-24)/(3*N-2)^3")
    assert cpm_total(4) == parse_rational(
        "(6571*N^11-56373*N^10+221376*N^9-524190*N^8+831075*N^7-926382*N^6+741276*N^5"
        "-426392*N^4+173200*N^3-47520*N^2+8000*N-640)/(3*N-2)^7"
    )


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_chern_check(m):
    got = chern_check(m)
    assert got.is_polynomial() and got == chern_polynomial(m)


def test_chern_polynomial_values():
    assert str(chern_polynomial(1)) == "N-2"
    assert str(chern_polynomial(4)) == "N^4-5*N^3+10*N^2-10*N+5"


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_leading_coefficient_of_lowest_index(m):
    s = series_expand(cpm_expected_number(m, m), 1)
    assert s.top_degree == m
    assert s.coeffs[0] == Fraction(2 * (m + 1), m + 2)


def test_leading_coefficients_match_table():
    table = {4: [1.66667, 0.93696, 0.33019, 0.06533, 0.00543]}
    for m, row in table.items():
        for r, want in enumerate(row):
            lead = series_expand(cpm_expected_number(m, m + r), 1).coeffs[0]
            assert float(lead) == pytest.approx(want, abs=6e-6)


def test_series_examples():
    s = series_expand(parse_rational("(5*N^2-8*N+4)/(3*N-2)"), 3)
    assert s.coeffs == [Fraction(5, 3), Fraction(-14, 9), Fraction(8, 27)]
    s = series_expand(parse_rational("N^2/(3*N-2)"), 3)
    assert s.coeffs == [Fraction(1, 3), Fraction(2, 9), Fraction(4, 27)]
    s = series_expand(parse_rational("N-2"), 3)
    assert s.coeffs[:2] == [1, -2] and s.coeffs[2] == 0 and s.remainder == 0


def test_series_recomposes_exactly():
    f = cpm_expected_number(2, 4)
    s = series_expand(f, 5)
    trunc = sum((Fraction(c) * Fraction(7) ** d for c, d in zip(s.coeffs, s.degrees)), Fraction(0))
    assert trunc + s.remainder(7) == f(7)
    # remainder is O(N^(top - terms))
    assert s.remainder.num.degree - s.remainder.den.degree <= s.truncation_order


def test_counts_positive_for_small_n():
    for m in (1, 2, 3):
        for q in range(m, 2 * m + 1):
            assert all(cpm_expected_number(m, q)(n) > 0 for n in (2, 3, 10))
