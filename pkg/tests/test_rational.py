from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from holocrit.rational import Polynomial, RationalFunction, parse_rational, poly_gcd

N = sympy.Symbol("N")
small = st.integers(-6, 6)
polys = st.lists(small, min_size=1, max_size=4).map(Polynomial)
nonzero_polys = polys.filter(lambda p: not p.is_zero())


def to_sympy(f: RationalFunction):
    num = sum(sympy.Rational(c.numerator, c.denominator) * N**i for i, c in enumerate(f.num.coeffs))
    den = sum(sympy.Rational(c.numerator, c.denominator) * N**i for i, c in enumerate(f.den.coeffs))
    return num / den


@settings(max_examples=80, deadline=None)
@given(a=polys, b=nonzero_polys, c=polys, d=nonzero_polys)
def test_arithmetic_matches_sympy(a, b, c, d):
    f, g = RationalFunction(a, b), RationalFunction(c, d)
    for ours, theirs in ((f + g, to_sympy(f) + to_sympy(g)), (f - g, to_sympy(f) - to_sympy(g)),
                         (f * g, to_sympy(f) * to_sympy(g))):
        assert sympy.simplify(to_sympy(ours) - theirs) == 0


@settings(max_examples=60, deadline=None)
@given(a=nonzero_polys, b=nonzero_polys, k=st.integers(1, 3))
def test_gcd_divides_both(a, b, k):
    g = poly_gcd(a * b**k, b)
    assert g.lead == 1
    assert (a * b**k).divmod(g)[1].is_zero()
    assert (b.divmod(g))[1].is_zero()
    assert g.degree == b.degree


def test_canonical_form_is_reduced():
    f = parse_rational("(2*N-2)*(N+1)/((4*N-4)*(3*N-2))")
    assert str(f) == "(N+1)/(6*N-4)"
    assert f == parse_rational("(N+1)/(6*N-4)")


def test_canonical_sign_convention():
    f = parse_rational("N/(2-3*N)")
    assert f.den.lead > 0
    assert str(f) == "-N/(3*N-2)"


def test_parse_and_print_examples():
    assert str(parse_rational("3*(N-1)^3/(2*N-1)")) == "(3*N^3-9*N^2+9*N-3)/(2*N-1)"
    assert parse_rational("3*(N-1)^3/(2*N-1)").factored() == "3*(N-1)^3/(2*N-1)"
    assert parse_rational("16 (N-1)**3 N^2/(3N-2)^3").factored() == "16*(N-1)^3*N^2/(3*N-2)^3"
    assert parse_rational("11/8").factored() == "11/8"
    assert str(parse_rational("N/2")) == "N/2"


def test_parse_errors():
    for bad in ("N+", "(N", "N^x", "2/0"):
        with pytest.raises((ValueError, ZeroDivisionError)):
            parse_rational(bad)


def test_evaluation_is_exact():
    f = parse_rational("(5*N^2-8*N+4)/(3*N-2)")
    assert f(3) == Fraction(25, 7)


def test_negative_power_and_division():
    f = parse_rational("(N-1)/(N+2)")
    assert f**-2 == parse_rational("(N+2)^2/(N-1)^2")
    assert f / f == 1


def test_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        RationalFunction(Polynomial([1]), Polynomial())
