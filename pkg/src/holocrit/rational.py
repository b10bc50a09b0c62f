"""Exact univariate polynomials and rational functions in N over Q.

Coefficients are :class:`fractions.Fraction`.  Rational functions are kept in
a canonical form: numerator and denominator have integer coefficients with no
common polynomial factor, the denominator has positive leading coefficient,
and the integer content of the pair is 1.  Two equal functions therefore have
identical string forms.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, Union

Number = Union[int, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"exact arithmetic only; got {type(x).__name__}")


class Polynomial:
    """Polynomial in N, coefficients in ascending powers."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def const(cls, c: Number) -> "Polynomial":
        return cls([c])

    @classmethod
    def var(cls) -> "Polynomial":
        return cls([0, 1])

    @classmethod
    def linear(cls, a: Number, b: Number) -> "Polynomial":
        """``a*N + b``."""
        return cls([b, a])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.const(other)

    def __add__(self, other):
        if isinstance(other, RationalFunction):
            return NotImplemented
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        if isinstance(other, RationalFunction):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return NotImplemented
        o = self._coerce(other)
        if self.is_zero() or o.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative polynomial power")
        out, base = Polynomial.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other):
        return RationalFunction(self, self._coerce(other))

    def __rtruediv__(self, other):
        return RationalFunction(self._coerce(other), self)

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        if len(rem) - 1 < dq:
            return Polynomial(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        inv = 1 / other.lead
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] * inv
            if c:
                quot[i - dq] = c
                for j, b in enumerate(other.coeffs):
                    rem[i - dq + j] -= c * b
        return Polynomial(quot), Polynomial(rem[:dq])

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return Polynomial(c / self.lead for c in self.coeffs)

    def content(self) -> Fraction:
        """Positive rational c with self / c primitive with integer coefficients."""
        if self.is_zero():
            return Fraction(1)
        den = reduce(math.lcm, (c.denominator for c in self.coeffs), 1)
        num = reduce(math.gcd, (c.numerator for c in self.coeffs), 0)
        return Fraction(num, den)

    def int_coeffs(self) -> list[int]:
        for c in self.coeffs:
            if c.denominator != 1:
                raise ValueError("polynomial has non-integer coefficients")
        return [c.numerator for c in self.coeffs]

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        return format_poly(self)


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic greatest common divisor (Euclid over Q)."""
    while not b.is_zero():
        a, b = b, a.divmod(b)[1].monic()
    return a.monic() if not a.is_zero() else a


def format_poly(p: Polynomial, var: str = "N") -> str:
    """Expanded ASCII form, descending powers: ``59*N^5-231*N^4+...``."""
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if k == 0:
            body = str(a)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if a == 1 else f"{a}*{mono}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += sign + body
    return out


class RationalFunction:
    """Reduced ratio ``num/den`` of polynomials in N.

    ``valid_from`` optionally records the smallest integer N for which the
    function represents the quantity it was computed for.
    """

    __slots__ = ("num", "den", "valid_from")

    def __init__(self, num, den=None, valid_from: int | None = None):
        num = num if isinstance(num, Polynomial) else Polynomial.const(num)
        den = Polynomial.const(1) if den is None else den
        den = den if isinstance(den, Polynomial) else Polynomial.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        self.num, self.den = _canonical(num, den)
        self.valid_from = valid_from

    @classmethod
    def from_parts(cls, num: Polynomial, den: Polynomial) -> "RationalFunction":
        return cls(num, den)

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        return RationalFunction(Polynomial.const(other))

    def _keep(self, other, result):
        vf = [v for v in (self.valid_from, getattr(other, "valid_from", None)) if v is not None]
        result.valid_from = max(vf) if vf else None
        return result

    def __add__(self, other):
        o = self._coerce(other)
        if self.den == o.den:
            return self._keep(o, RationalFunction(self.num + o.num, self.den))
        return self._keep(o, RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, self.valid_from)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return self._keep(o, RationalFunction(self.num * o.num, self.den * o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return self._keep(o, RationalFunction(self.num * o.den, self.den * o.num))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction(self.den**-k, self.num**-k, self.valid_from)
        return RationalFunction(self.num**k, self.den**k, self.valid_from)

    def __eq__(self, other) -> bool:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __call__(self, x):
        d = self.den(x)
        if d == 0:
            raise ZeroDivisionError(f"pole at N={x}")
        n = self.num(x)
        if isinstance(n, int) and isinstance(d, int):
            return Fraction(n, d)
        return n / d

    def __repr__(self) -> str:
        return f"RationalFunction({self})"

    def __str__(self) -> str:
        if self.den == Polynomial.const(1):
            return format_poly(self.num)
        return f"{_wrap(self.num)}/{_wrap(self.den)}"

    def factored(self) -> str:
        return format_factored(self)


def _wrap(p: Polynomial) -> str:
    body = format_poly(p)
    return f"({body})" if sum(1 for c in p.coeffs if c) > 1 else body


def _canonical(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if num.is_zero():
        return Polynomial(), Polynomial.const(1)
    if den.degree > 0:
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
    cn, cd = num.content(), den.content()
    # overall constant k = cn/cd; write k = a/b in lowest terms
    k = cn / cd
    if den.lead < 0:
        k = -k
    pn = Polynomial(c / cn for c in num.coeffs)
    pd = Polynomial(c / cd for c in den.coeffs)
    if pd.lead < 0:
        pd = -pd
    return pn * k.numerator, pd * k.denominator


# ----------------------------------------------------------------------------
# factored display


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def _split_linear(p: Polynomial) -> tuple[int, list[tuple[Fraction, int]], Polynomial]:
    """Factor a nonzero integer polynomial as const * prod (b*N - a)^e * rest,
    with rational roots a/b; ``rest`` is primitive with positive leading
    coefficient and no rational roots."""
    c = p.content()
    if p.lead < 0:
        c = -c
    q = Polynomial(x / c for x in p.coeffs)
    roots: list[tuple[Fraction, int]] = []
    mult = 0
    while q.degree > 0 and q.coeffs[0] == 0:
        q = Polynomial(q.coeffs[1:])
        mult += 1
    if mult:
        roots.append((Fraction(0), mult))
    if q.degree > 0:
        ci = q.int_coeffs()
        cands = set()
        for a in _divisors(ci[0]):
            for b in _divisors(ci[-1]):
                cands.add(Fraction(a, b))
                cands.add(Fraction(-a, b))
        for r in sorted(cands, reverse=True):
            e = 0
            lin = Polynomial.linear(r.denominator, -r.numerator)
            while q.degree > 0:
                quo, rem = q.divmod(lin)
                if not rem.is_zero():
                    break
                q, e = quo, e + 1
            if e:
                roots.append((r, e))
    # q now primitive up to the units introduced by dividing by b*N - a
    cq = q.content()
    q = Polynomial(x / cq for x in q.coeffs)
    c = c * cq
    return c, roots, q


def _factor_strings(p: Polynomial) -> tuple[Fraction, list[str]]:
    c, roots, rest = _split_linear(p)
    out = []
    for r, e in sorted(roots, key=lambda t: t[0], reverse=True):
        if r == 0:
            base, bare = "N", True
        else:
            lin = Polynomial.linear(r.denominator, -r.numerator)
            base, bare = format_poly(lin), False
        if e == 1:
            out.append(base if bare else f"({base})")
        else:
            out.append(f"{base}^{e}" if bare else f"({base})^{e}")
    if rest.degree > 0:
        out.append(f"({format_poly(rest)})")
    return c, out


def format_factored(f: RationalFunction) -> str:
    """Product form, e.g. ``16*(N-1)^3*N^2/(3*N-2)^3``."""
    if f.num.is_zero():
        return "0"
    cn, nf = _factor_strings(f.num)
    cd, df = _factor_strings(f.den)
    k = cn / cd
    sign = "-" if k < 0 else ""
    k = abs(k)
    num_parts = ([str(k.numerator)] if k.numerator != 1 or not nf else []) + nf
    den_parts = ([str(k.denominator)] if k.denominator != 1 else []) + df
    num = sign + "*".join(num_parts)
    if not den_parts:
        return num
    if len(den_parts) == 1:
        return f"{num}/{den_parts[0]}"
    return f"{num}/({'*'.join(den_parts)})"


# ----------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|(N)|(\*\*|[-+*/^()]))")


def parse_rational(text: str) -> RationalFunction:
    """Parse an expression in N with integers, + - * / ^ (or **) and parentheses."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        num, var, op = m.groups()
        tokens.append(("num", int(num)) if num else ("N", None) if var else ("op", "^" if op == "**" else op))
        pos = m.end()
    tokens.append(("end", None))
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def expr():
        val = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            rhs = term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term():
        val = unary()
        while True:
            tok = peek()
            if tok in (("op", "*"), ("op", "/")):
                take()
                rhs = unary()
                val = val * rhs if tok[1] == "*" else val / rhs
            elif tok[0] in ("num", "N") or tok == ("op", "("):
                val = val * unary()  # implicit multiplication
            else:
                return val

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            sign = 1
            if peek() == ("op", "-"):
                take()
                sign = -1
            kind, val = take()
            if kind != "num":
                raise ValueError("exponent must be an integer literal")
            return base ** (sign * val)
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return RationalFunction(Polynomial.const(val))
        if kind == "N":
            return RationalFunction(Polynomial.var())
        if (kind, val) == ("op", "("):
            inner = expr()
            if take() != ("op", ")"):
                raise ValueError("unbalanced parentheses")
            return inner
        raise ValueError(f"unexpected token {val!r}")

    result = expr()
    if peek()[0] != "end":
        raise ValueError(f"trailing input in {text!r}")
    return result
