"""Truncated Laurent series in N and exact multiples of powers of pi."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .rational import RationalFunction


@dataclass(frozen=True)
class PiMultiple:
    """The number ``coef * pi**power`` with exact rational ``coef``."""

    coef: Fraction
    power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coef", Fraction(self.coef))

    def __float__(self) -> float:
        return float(self.coef) * math.pi**self.power

    def __mul__(self, other):
        if isinstance(other, PiMultiple):
            return PiMultiple(self.coef * other.coef, self.power + other.power).simplify()
        if isinstance(other, (int, Fraction)):
            return PiMultiple(self.coef * other, self.power).simplify()
        return float(self) * other

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PiMultiple):
            return PiMultiple(self.coef / other.coef, self.power - other.power).simplify()
        if isinstance(other, (int, Fraction)):
            return PiMultiple(self.coef / other, self.power).simplify()
        return float(self) / other

    def __add__(self, other):
        if isinstance(other, PiMultiple) and other.power == self.power:
            return PiMultiple(self.coef + other.coef, self.power).simplify()
        if isinstance(other, (int, Fraction)) and self.power == 0:
            return self.coef + other
        if isinstance(other, (int, Fraction)) and other == 0:
            return self
        return float(self) + float(other)

    __radd__ = __add__

    def __neg__(self):
        return PiMultiple(-self.coef, self.power)

    def simplify(self):
        if self.power == 0 or self.coef == 0:
            return self.coef
        return self

    def __str__(self) -> str:
        if self.power == 0:
            return str(self.coef)
        p = "pi" if self.power in (1, -1) else f"pi^{abs(self.power)}"
        return f"{self.coef}*{p}" if self.power > 0 else f"{self.coef}/{p}"


def is_exact(x: Any) -> bool:
    return isinstance(x, (int, Fraction, PiMultiple))


def _fmt(c) -> str:
    if isinstance(c, float):
        return f"{c:.10g}"
    return str(c)


@dataclass
class LaurentSeries:
    """``sum_i coeffs[i] * N**(top_degree - i)``, truncated before
    ``N**truncation_order``.

    Coefficients may be exact (Fraction / PiMultiple) or float; ``exact`` flags
    each one.  ``std_errors`` accompanies fitted float coefficients and
    ``remainder`` holds the exact tail when the series came from a rational
    function.
    """

    top_degree: int
    coeffs: list
    truncation_order: int | None = None
    std_errors: list[float] | None = None
    remainder: RationalFunction | None = None
    labels: list[str] | None = None
    exact: list[bool] = field(init=False)

    def __post_init__(self):
        self.coeffs = list(self.coeffs)
        if self.truncation_order is None:
            self.truncation_order = self.top_degree - len(self.coeffs)
        if self.truncation_order != self.top_degree - len(self.coeffs):
            raise ValueError("truncation order inconsistent with coefficient count")
        if self.std_errors is not None and len(self.std_errors) != len(self.coeffs):
            raise ValueError("std_errors length mismatch")
        self.exact = [is_exact(c) for c in self.coeffs]

    @property
    def degrees(self) -> list[int]:
        return [self.top_degree - i for i in range(len(self.coeffs))]

    def coefficient(self, degree: int):
        i = self.top_degree - degree
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        if degree > self.top_degree:
            return Fraction(0)
        raise IndexError(f"N^{degree} lies beyond the truncation order")

    def truncate(self, lowest_degree: int) -> "LaurentSeries":
        k = self.top_degree - lowest_degree + 1
        errs = None if self.std_errors is None else self.std_errors[:k]
        return LaurentSeries(self.top_degree, self.coeffs[:k], std_errors=errs, labels=None if self.labels is None else self.labels[:k])

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        top = max(self.top_degree, other.top_degree)
        low = max(self.truncation_order, other.truncation_order) + 1
        coeffs = [self._get(d) + other._get(d) for d in range(top, low - 1, -1)]
        return LaurentSeries(top, coeffs)

    def _get(self, d):
        if d > self.top_degree:
            return Fraction(0)
        return self.coefficient(d)

    def evaluate(self, n: float) -> float:
        return sum(float(c) * n**d for c, d in zip(self.coeffs, self.degrees))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.top_degree == other.top_degree and self.coeffs == other.coeffs

    def to_dict(self) -> dict:
        out = {
            "top_degree": self.top_degree,
            "truncation_order": self.truncation_order,
            "coefficients": [
                {
                    "degree": d,
                    "value": float(c),
                    "exact": str(c) if e else None,
                    **({"std_error": self.std_errors[i]} if self.std_errors else {}),
                    **({"label": self.labels[i]} if self.labels else {}),
                }
                for i, (c, d, e) in enumerate(zip(self.coeffs, self.degrees, self.exact))
            ],
        }
        return out

    def __str__(self) -> str:
        out = ""
        for i, (c, d) in enumerate(zip(self.coeffs, self.degrees)):
            neg = _is_negative(c)
            body = _fmt(-c if neg else c)
            if d == 1:
                body += "*N"
            elif d != 0:
                body += f"*N^{d}"
            if i == 0:
                out = ("-" if neg else "") + body
            else:
                out += (" - " if neg else " + ") + body
        if not out:
            out = "0"
        if self.remainder is not None and self.remainder == 0:
            return out
        return f"{out} + O(N^{self.truncation_order})"


def _is_negative(c) -> bool:
    if isinstance(c, PiMultiple):
        return c.coef < 0
    return c < 0


def series_of_coefficients(top: int, coeffs: Sequence) -> LaurentSeries:
    return LaurentSeries(top, list(coeffs))
