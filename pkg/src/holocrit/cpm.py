"""Exact expected numbers of critical points of each Morse index on CP^m.

The count for Morse index q is a constant times ``(N-1)^(m+1)/((m+2)N-2)``
times an integral over the ordered region

    Y_p = {l_1 > ... > l_p > 0 > l_(p+1) > ... > l_m},   p = 2m - q,

of ``|prod l_j| * Vandermonde(l) * exp(-sum l_j)``, with an extra factor
``exp(c * l_m)``, ``c = m + 2 - 2/N``, whenever p < m.  The integrand is
expanded into monomials and each monomial is integrated exactly after the gap
substitution

    l_j     =  t_j + ... + t_p          (j <= p, t_i > 0)
    l_(p+k) = -(s_1 + ... + s_k)        (k >= 1, s_i > 0)

which turns every term into a product of ``a! / beta^(a+1)`` factors.
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from itertools import product
from typing import Union

from .rational import Polynomial, RationalFunction
from .series import LaurentSeries

Exponents = tuple[int, ...]
CValue = Union[Fraction, int, float, RationalFunction, None]


class ChernCheckError(AssertionError):
    pass


class SignedMonomialSum:
    """Sum of ``coef * prod l_j^exps[j]`` with like terms combined."""

    def __init__(self, m: int, terms: dict[Exponents, Fraction] | None = None):
        self.m = m
        self._terms: dict[Exponents, Fraction] = {}
        for e, c in (terms or {}).items():
            self.add(e, c)

    def add(self, exps: Exponents, coef) -> None:
        if len(exps) != self.m or min(exps, default=0) < 0:
            raise ValueError(f"bad exponent vector {exps}")
        c = self._terms.get(exps, Fraction(0)) + coef
        if c:
            self._terms[exps] = c
        else:
            self._terms.pop(exps, None)

    @property
    def terms(self) -> list[tuple[Fraction, Exponents]]:
        return [(c, e) for e, c in sorted(self._terms.items(), reverse=True)]

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, SignedMonomialSum) and self._terms == other._terms

    def evaluate(self, lam) -> float:
        return sum(float(c) * math.prod(x**a for x, a in zip(lam, e)) for c, e in self.terms)


def _mul_linear(poly: dict[Exponents, Fraction], linear: dict[int, int], m: int) -> dict[Exponents, Fraction]:
    out: dict[Exponents, Fraction] = defaultdict(Fraction)
    for e, c in poly.items():
        for j, a in linear.items():
            f = list(e)
            f[j] += 1
            out[tuple(f)] += c * a
    return {e: c for e, c in out.items() if c}


def expand_integrand(m: int, p: int) -> SignedMonomialSum:
    """Monomials of ``|prod l_j| * prod_(i<j) (l_i - l_j)`` on Y_p."""
    if not 0 <= p <= m:
        raise ValueError("need 0 <= p <= m")
    sign = -1 if (m - p) % 2 else 1
    poly: dict[Exponents, Fraction] = {tuple([1] * m): Fraction(sign)}
    for i in range(m):
        for j in range(i + 1, m):
            poly = _mul_linear(poly, {i: 1, j: -1}, m)
    return SignedMonomialSum(m, poly)


# ----------------------------------------------------------------------------
# ordered-region integrals


def _multinomial_expand(power: int, variables: list[int], nvars: int) -> dict[Exponents, int]:
    """(sum of the listed variables)^power as {exponents: coefficient}."""
    out: dict[Exponents, int] = defaultdict(int)

    def rec(idx, left, exps, coef):
        if idx == len(variables) - 1:
            e = list(exps)
            e[variables[idx]] += left
            out[tuple(e)] += coef
            return
        for k in range(left + 1):
            e = list(exps)
            e[variables[idx]] += k
            rec(idx + 1, left - k, tuple(e), coef * math.comb(left, k))

    if not variables:
        if power:
            raise ValueError("empty sum raised to a positive power")
        return {tuple([0] * nvars): 1}
    rec(0, power, tuple([0] * nvars), 1)
    return dict(out)


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = defaultdict(int)
    for ea, ca in a.items():
        for eb, cb in b.items():
            out[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
    return {e: c for e, c in out.items() if c}


def gap_coefficients(exps: Exponents, m: int, p: int) -> dict[Exponents, Fraction]:
    """Integrate out the positive-block gaps of ``prod l_j^exps[j]`` on Y_p.

    Returns ``{e: coef}`` over exponents of ``s_1..s_(m-p)``; the full integral
    is ``sum coef * prod_i e_i! / beta_i^(e_i + 1)`` with
    ``beta_i = c - (m - p - i + 1)``.
    """
    if len(exps) != m:
        raise ValueError("exponent vector has wrong length")
    n = m - p
    nv = p + n  # t_1..t_p then s_1..s_n
    poly: dict[Exponents, int] = {tuple([0] * nv): 1}
    for j in range(p):
        if exps[j]:
            poly = _poly_mul(poly, _multinomial_expand(exps[j], list(range(j, p)), nv))
    sign = 1
    for k in range(1, n + 1):
        a = exps[p + k - 1]
        if a:
            sign *= (-1) ** a
            poly = _poly_mul(poly, _multinomial_expand(a, [p + i for i in range(k)], nv))
    out: dict[Exponents, Fraction] = defaultdict(Fraction)
    for e, c in poly.items():
        # integral of t_i^b exp(-i t_i) over (0, inf) is b! / i^(b+1)
        w = Fraction(sign * c)
        for i in range(p):
            b = e[i]
            w *= Fraction(math.factorial(b), (i + 1) ** (b + 1))
        out[e[p:]] += w
    return {e: c for e, c in out.items() if c}


def c_of_n(m: int) -> RationalFunction:
    """``c = m + 2 - 2/N`` as a rational function."""
    return RationalFunction(Polynomial.linear(m + 2, -2), Polynomial.var())


def _evaluate_numeric(gap: dict[Exponents, Fraction], m: int, p: int, c):
    n = m - p
    betas = [c - (n - i) for i in range(n)]  # beta for s_1..s_n
    for i, b in enumerate(betas):
        if not b > 0:
            raise ValueError(f"divergent direction: beta_{i + 1} = {b} <= 0")
    total = 0
    for e, coef in gap.items():
        term = coef
        for a, b in zip(e, betas):
            term = term * math.factorial(a) / b ** (a + 1)
        total = total + term
    return total


def _evaluate_symbolic(gap: dict[Exponents, Fraction], m: int, p: int) -> RationalFunction:
    """Sum the gap terms with c = ((m+2)N-2)/N over one common denominator."""
    n = m - p
    if n == 0:
        return RationalFunction(Polynomial.const(gap.get((), Fraction(0))))
    # beta_i = ((m + 2 - k_i) N - 2) / N with k_i = n - i + 1 <= m
    slopes = [m + 2 - (n - i) for i in range(n)]
    for s in slopes:
        assert s >= 2, "beta must be positive for N >= 2"
    lins = [Polynomial.linear(s, -2) for s in slopes]
    top = [max(e[i] for e in gap) + 1 for i in range(n)]
    pow_cache = [[l**k for k in range(t + 1)] for l, t in zip(lins, top)]
    nvar = Polynomial.var()
    num = Polynomial()
    for e, coef in gap.items():
        term = Polynomial.const(coef * math.prod(math.factorial(a) for a in e))
        term = term * nvar ** sum(a + 1 for a in e)
        for i, a in enumerate(e):
            term = term * pow_cache[i][top[i] - a - 1]
        num = num + term
    den = Polynomial.const(1)
    for i in range(n):
        den = den * pow_cache[i][top[i]]
    return _reduce_by_factors(num, den, lins)


def _reduce_by_factors(num: Polynomial, den: Polynomial, factors: list[Polynomial]) -> RationalFunction:
    # den is a product of the given linear factors; cancel them directly
    for lin in factors:
        while den.degree > 0:
            qn, rn = num.divmod(lin)
            if not rn.is_zero():
                break
            qd, rd = den.divmod(lin)
            if not rd.is_zero():
                break
            num, den = qn, qd
    return RationalFunction(num, den)


def ordered_region_integral(exps: Exponents, m: int, p: int, c: CValue = None):
    """Exact integral of ``prod l_j^exps[j]`` over Y_p with the exponential
    weight of the CP^m formula.

    ``c`` may be a Fraction / int / float (numeric value) or ``None`` for the
    rational function ``c = m + 2 - 2/N`` (result is a RationalFunction).
    """
    if not 0 <= p <= m:
        raise ValueError("need 0 <= p <= m")
    gap = gap_coefficients(tuple(exps), m, p)
    if c is None:
        return _evaluate_symbolic(gap, m, p)
    if isinstance(c, RationalFunction):
        if c != c_of_n(m):
            n = m - p
            total = RationalFunction(0)
            for e, coef in gap.items():
                term = RationalFunction(Polynomial.const(coef))
                for i, a in enumerate(e):
                    term = term * math.factorial(a) / (c - (n - i)) ** (a + 1)
                total = total + term
            return total
        return _evaluate_symbolic(gap, m, p)
    return _evaluate_numeric(gap, m, p, c)


# ----------------------------------------------------------------------------
# CP^m counts


def _prefactor(m: int) -> RationalFunction:
    const = Fraction(2 ** ((m * m + m + 2) // 2), math.prod(math.factorial(j) for j in range(1, m + 1)))
    nm1 = Polynomial.linear(1, -1)
    return RationalFunction(nm1 ** (m + 1) * const, Polynomial.linear(m + 2, -2))


def cpm_integral(m: int, q: int) -> RationalFunction:
    """The ordered-region integral of the CP^m formula (without prefactor)."""
    if not m <= q <= 2 * m:
        raise ValueError(f"Morse index q={q} outside [{m}, {2 * m}]")
    p = 2 * m - q
    acc: dict[Exponents, Fraction] = defaultdict(Fraction)
    for coef, exps in expand_integrand(m, p).terms:
        for e, c in gap_coefficients(exps, m, p).items():
            acc[e] += coef * c
    return _evaluate_symbolic({e: c for e, c in acc.items() if c}, m, p)


def cpm_expected_number(m: int, q: int) -> RationalFunction:
    """Expected number of index-q critical points of a random section of
    O(N) -> CP^m, valid for N >= 2."""
    if m < 1:
        raise ValueError("m must be >= 1")
    out = _prefactor(m) * cpm_integral(m, q)
    out.valid_from = 2
    return out


def cpm_total(m: int) -> RationalFunction:
    total = RationalFunction(0)
    for q in range(m, 2 * m + 1):
        total = total + cpm_expected_number(m, q)
    total.valid_from = 2
    return total


def chern_polynomial(m: int) -> RationalFunction:
    """Top Chern number of the twisted cotangent bundle T* (x) O(N) of CP^m."""
    coeffs = [0] * (m + 1)
    for j in range(m + 1):
        coeffs[m - j] = (-1) ** j * math.comb(m + 1, j)
    return RationalFunction(Polynomial(coeffs))


def chern_check(m: int) -> RationalFunction:
    """Alternating sum over Morse indices; must equal :func:`chern_polynomial`."""
    alt = RationalFunction(0)
    for q in range(m, 2 * m + 1):
        term = cpm_expected_number(m, q)
        alt = alt + (term if (m + q) % 2 == 0 else -term)
    expected = chern_polynomial(m)
    if not alt.is_polynomial() or alt != expected:
        raise ChernCheckError(f"alternating sum {alt} != Chern polynomial {expected}")
    return alt


def series_expand(f: RationalFunction, terms: int) -> LaurentSeries:
    """Leading ``terms`` coefficients of f in descending powers of N, with the
    exact remainder."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    top = f.num.degree - f.den.degree
    num_rev = list(reversed(f.num.coeffs))
    den_rev = list(reversed(f.den.coeffs))
    g: list[Fraction] = []
    for k in range(terms):
        acc = num_rev[k] if k < len(num_rev) else Fraction(0)
        for j in range(1, min(k, len(den_rev) - 1) + 1):
            acc -= den_rev[j] * g[k - j]
        g.append(acc / den_rev[0])
    low = top - terms + 1
    # truncated sum as polynomial / N^shift
    shift = max(0, -low)
    poly = [Fraction(0)] * (top + shift + 1)
    for i, c in enumerate(g):
        poly[top - i + shift] += c
    trunc = RationalFunction(Polynomial(poly), Polynomial.var() ** shift)
    rem = f - trunc
    return LaurentSeries(top, g, remainder=rem)
