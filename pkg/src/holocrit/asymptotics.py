"""Large-N expansions of expected critical-point counts.

Closed-form three-term expansions for curves, assembly of the general
three-term expansion from universal constants and topological data, and
least-squares extraction of expansion coefficients from densities computed
at a ladder of N values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .montecarlo import MCEstimate
from .series import LaurentSeries, PiMultiple, is_exact

Number = Union[int, Fraction, float, PiMultiple]

TOPOLOGY_SLOTS = ("c1L^m", "c1M*c1L^(m-1)", "c1M^2*c1L^(m-2)", "c2M*c1L^(m-2)", "calabi")
CONSTANT_SLOTS = ("b0q", "beta1q", "beta2q", "beta2q_prime", "beta2q_dprime")


class MissingSlotError(KeyError):
    def __init__(self, slot: str):
        super().__init__(slot)
        self.slot = slot

    def __str__(self) -> str:
        return f"missing value for slot {self.slot!r}"


@dataclass(frozen=True)
class CurveGeometry:
    """Genus, line-bundle degree and Calabi functional of a polarised curve."""

    genus: int
    degree: int
    calabi: Number

    def __post_init__(self):
        if self.genus < 0:
            raise ValueError("genus must be >= 0")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if float(self.calabi) < 0:
            raise ValueError("calabi functional must be >= 0")

    @classmethod
    def round_sphere(cls, degree: int = 1) -> "CurveGeometry":
        # constant curvature on CP^1: int rho^2 omega = 4 pi for c1 = 1
        return cls(0, degree, PiMultiple(Fraction(4, degree), 1))

    @property
    def euler_char(self) -> int:
        return 2 - 2 * self.genus


def _calabi_over_27pi(calabi: Number):
    if isinstance(calabi, PiMultiple):
        return calabi / PiMultiple(27, 1)
    if isinstance(calabi, (int, Fraction)):
        if calabi == 0:
            return Fraction(0)
        return PiMultiple(Fraction(calabi, 27), -1)
    return float(calabi) / (27 * math.pi)


def curve_expansion(geom: CurveGeometry, q: int | None) -> LaurentSeries:
    """Expected number of saddles (q=1), local maxima (q=2) or all critical
    points (q=None) of a random section of L^N over a curve, through N^-1."""
    g2 = Fraction(2 * geom.genus - 2)
    c1 = Fraction(geom.degree)
    cal = _calabi_over_27pi(geom.calabi)
    if q == 1:
        coeffs = [Fraction(4, 3) * c1, Fraction(8, 9) * g2, cal]
    elif q == 2:
        coeffs = [Fraction(1, 3) * c1, Fraction(-1, 9) * g2, cal]
    elif q is None:
        coeffs = [Fraction(5, 3) * c1, Fraction(7, 9) * g2, 2 * cal]
    else:
        raise ValueError("q must be 1, 2 or None (total)")
    return LaurentSeries(1, coeffs, labels=["c1(L)", "2g-2", "calabi"])


# ----------------------------------------------------------------------------
# fitting


def _as_point(item) -> tuple[float, float, float]:
    n, val = item
    if isinstance(val, MCEstimate):
        return float(n), float(val.mean), float(val.std_error)
    if isinstance(val, tuple):
        return float(n), float(val[0]), float(val[1])
    return float(n), float(val), 0.0


def fit_expansion(densities: Iterable, m: int, n_terms: int = 3) -> LaurentSeries:
    """Fit ``density(N) ~ b0 N^m + b1 N^(m-1) + b2 N^(m-2)``.

    ``densities`` holds ``(N, value)`` pairs where value is an MCEstimate, a
    ``(mean, std_error)`` tuple or a plain number.  Weighted least squares on
    ``N^-m * density`` against ``1, N^-1, N^-2``; with all errors zero (exact
    data) the fit is unweighted and the reported errors come from residuals.
    """
    if not 1 <= n_terms <= 3:
        raise ValueError("n_terms must be 1, 2 or 3")
    pts = [_as_point(d) for d in densities]
    ns = np.array([p[0] for p in pts])
    if len(set(ns.tolist())) < n_terms:
        raise np.linalg.LinAlgError(
            f"rank deficient: {len(set(ns.tolist()))} distinct N values for {n_terms} terms"
        )
    y = np.array([p[1] for p in pts]) * ns ** (-m)
    sig = np.array([p[2] for p in pts]) * ns ** (-m)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(sig))):
        raise ValueError("non-finite density estimate")
    x = ns[:, None] ** (-np.arange(n_terms)[None, :])
    weighted = bool(np.all(sig > 0))
    w = 1.0 / sig if weighted else np.ones_like(y)
    xw, yw = x * w[:, None], y * w
    if np.linalg.matrix_rank(xw) < n_terms:
        raise np.linalg.LinAlgError("rank deficient design matrix")
    coef, *_ = np.linalg.lstsq(xw, yw, rcond=None)
    cov = np.linalg.inv(xw.T @ xw)
    if not weighted:
        dof = len(y) - n_terms
        resid = yw - xw @ coef
        cov = cov * (float(resid @ resid) / dof if dof > 0 else 0.0)
    errs = np.sqrt(np.diag(cov))
    labels = ["b0", "b1", "b2"][:n_terms]
    return LaurentSeries(m, [float(c) for c in coef], std_errors=[float(e) for e in errs], labels=labels)


def geometric_ladder(start: int, count: int, ratio: int = 2) -> list[int]:
    return [start * ratio**i for i in range(count)]


# ----------------------------------------------------------------------------
# general three-term expansion


def _product(*factors):
    out = Fraction(1)
    for f in factors:
        out = out * f
        if isinstance(out, PiMultiple):
            out = out.simplify()
    return out


def _sum(terms):
    total = Fraction(0)
    for t in terms:
        total = total + t
    return total


def corollary_en_expansion(
    m: int,
    topology: Mapping[str, Number],
    constants: Mapping[str, Number],
    n_terms: int = 3,
) -> LaurentSeries:
    """Three-term expansion of the expected number of index-q critical points.

    ``topology`` keys are :data:`TOPOLOGY_SLOTS`; ``constants`` keys are
    :data:`CONSTANT_SLOTS` for one fixed q.  A constant is required whenever
    its topological multiplier is nonzero; the c1(M)^2 and c2(M) slots do not
    exist for m = 1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 1 <= n_terms <= 3:
        raise ValueError("n_terms must be 1, 2 or 3")

    def topo(slot):
        if slot not in topology:
            raise MissingSlotError(slot)
        return topology[slot]

    def const(slot, multiplier):
        if multiplier == 0:
            return Fraction(0)
        if slot not in constants:
            raise MissingSlotError(slot)
        return constants[slot]

    pi_m = PiMultiple(1, m)
    coeffs = []
    labels = []
    t = topo("c1L^m")
    coeffs.append(_product(pi_m, Fraction(1, math.factorial(m)), const("b0q", t), t))
    labels.append("c1(L)^m")
    if n_terms >= 2:
        t = topo("c1M*c1L^(m-1)")
        coeffs.append(_product(pi_m, Fraction(1, math.factorial(m - 1)), const("beta1q", t), t))
        labels.append("c1(M)c1(L)^(m-1)")
    if n_terms >= 3:
        cal = topo("calabi")
        parts = [_product(const("beta2q", cal), cal)]
        if m >= 2:
            t1 = topo("c1M^2*c1L^(m-2)")
            t2 = topo("c2M*c1L^(m-2)")
            parts.append(_product(const("beta2q_prime", t1), t1))
            parts.append(_product(const("beta2q_dprime", t2), t2))
        coeffs.append(_sum(parts))
        labels.append("calabi + c1(M)^2 + c2(M)")
    return LaurentSeries(m, coeffs, labels=labels)


def curve_constants(q: int) -> dict[str, PiMultiple]:
    """Universal constants for m = 1 (q = 1 saddles, q = 2 maxima)."""
    if q == 1:
        return {"b0q": PiMultiple(Fraction(4, 3), -1), "beta1q": PiMultiple(Fraction(-8, 9), -1),
                "beta2q": PiMultiple(Fraction(1, 27), -1)}
    if q == 2:
        return {"b0q": PiMultiple(Fraction(1, 3), -1), "beta1q": PiMultiple(Fraction(1, 9), -1),
                "beta2q": PiMultiple(Fraction(1, 27), -1)}
    raise ValueError("q must be 1 or 2")


def curve_topology(geom: CurveGeometry) -> dict[str, Number]:
    return {"c1L^m": geom.degree, "c1M*c1L^(m-1)": geom.euler_char, "calabi": geom.calabi}


def exact_coefficients(series: LaurentSeries) -> bool:
    return all(is_exact(c) for c in series.coeffs)


def series_close(a: LaurentSeries, b: LaurentSeries, tol: float) -> bool:
    return a.top_degree == b.top_degree and all(
        abs(float(x) - float(y)) <= tol for x, y in zip(a.coeffs, b.coeffs)
    )

