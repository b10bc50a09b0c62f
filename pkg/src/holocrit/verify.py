"""Acceptance checks, one function per criterion.

Every check takes a ``size`` of ``"full"`` (the sample counts the criteria are
stated at) or ``"quick"`` (reduced counts for a smoke run) and returns a
:class:`CriterionResult`.  Reference values are transcribed below as text and
parsed, so comparisons with the published closed forms are literal.
"""

from __future__ import annotations

import contextlib
import io
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .asymptotics import CurveGeometry, curve_expansion, fit_expansion
from .cpm import chern_check, chern_polynomial, cpm_expected_number, cpm_total, series_expand
from .empirical import empirical_counts
from .gauss_mc import (
    METHODS,
    JetCovariance,
    b0_profile,
    beta2_profile,
    claim_g24_check,
    density_profile,
    estimate_b0,
    iz_check,
    morse_leading_table,
)
from .rational import parse_rational

PI = math.pi

B0_REFERENCE = {1: 5 / (3 * PI), 2: 118 / (27 * PI**2), 3: 3822 / (3**5 * PI**3)}

LEADING_TABLE = {
    1: ([1.33333, 0.33333], 1.66667),
    2: ([1.5, 0.59259, 0.09259], 2.18519),
    3: ([1.6, 0.78750, 0.21070, 0.02320], 2.62140),
}

BETA2_REFERENCE = {
    (1, 1): 1 / (3**3 * PI),
    (1, 2): 1 / (3**3 * PI),
    (2, 2): 1 / (2**3 * 5 * PI**2),
    (2, 3): 2**4 / (3**4 * 5 * PI**2),
    (2, 4): 47 / (2**3 * 3**4 * 5 * PI**2),
}

COUNT_REFERENCE = {
    (1, 1): "4*(N-1)^2/(3*N-2)",
    (1, 2): "N^2/(3*N-2)",
    (2, 2): "3*(N-1)^3/(2*N-1)",
    (2, 3): "16*(N-1)^3*N^2/(3*N-2)^3",
    (2, 4): "N^5*(5*N-4)/((3*N-2)^3*(2*N-1))",
    (3, 3): "8*(N-1)^4/(5*N-2)",
    (3, 4): "(N-1)^4*N^2*(63*N^2-50*N+10)/((2*N-1)^4*(5*N-2))",
    (3, 5): "256*(N-1)^4*N^5/((5*N-2)*(3*N-2)^5)",
    (3, 6): "N^9*(451*N^4-1248*N^3+1280*N^2-576*N+96)/((2*N-1)^4*(3*N-2)^5*(5*N-2))",
}

TOTAL_REFERENCE = {
    1: "(5*N^2-8*N+4)/(3*N-2)",
    2: "(59*N^5-231*N^4+375*N^3-310*N^2+132*N-24)/(3*N-2)^3",
    3: "(637*N^8-3978*N^7+11022*N^6-17608*N^5+17736*N^4-11552*N^3+4768*N^2-1152*N+128)/(3*N-2)^5",
}

CHERN_REFERENCE = {
    1: "N-2",
    2: "N^2-3*N+3",
    3: "N^3-4*N^2+6*N-4",
    4: "N^4-5*N^3+10*N^2-10*N+5",
}

IZ_PARAMS = {2: ([1.3, -0.8], [1.1, -0.6]), 3: ([1.3, 0.2, -0.9], [1.1, -0.3, -0.7])}

SIZES = {
    "full": {"b0": {1: 10**6, 2: 10**6, 3: 10**7}, "table": 10**7, "beta": 10**7, "identity": 10**6,
             "closed": 10**6, "trials": 2000},
    "quick": {"b0": {1: 10**5, 2: 10**5, 3: 10**5}, "table": 2 * 10**5, "beta": 2 * 10**5,
              "identity": 10**5, "closed": 10**5, "trials": 200},
}

Z_BOUND = 3.0


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.title}"


class _Checker:
    def __init__(self, number: int, title: str):
        self.result = CriterionResult(number, title, True)

    def check(self, ok: bool, text: str) -> None:
        self.result.details.append(("ok   " if ok else "FAIL ") + text)
        if not ok:
            self.result.passed = False


def _z(mean, se, target) -> float:
    if se == 0:
        return 0.0 if mean == target else math.inf
    return abs(mean - target) / se


# ----------------------------------------------------------------------------


def criterion_1(size: str = "full", seed: int = 101) -> CriterionResult:
    c = _Checker(1, "universal constants b0(m), m = 1, 2, 3, within 3 sigma")
    for m, target in B0_REFERENCE.items():
        n = SIZES[size]["b0"][m]
        est = estimate_b0(m, n, seed + m)
        z = est.zscore(target)
        c.check(z <= Z_BOUND, f"b0({m}) = {est.mean:.6f} +- {est.std_error:.1e} vs {target:.6f} (z={z:.2f}, n={n})")
    return c.result


def criterion_2(size: str = "full", seed: int = 202) -> CriterionResult:
    c = _Checker(2, "leading-coefficient table m <= 3 within 1% relative")
    n = SIZES[size]["table"]
    for m, (row, total) in LEADING_TABLE.items():
        prof = morse_leading_table(m, n, seed + m)
        for r, ref in enumerate(row):
            got = prof.values[m + r].mean
            rel = abs(got - ref) / ref
            c.check(rel < 0.01, f"m={m} r={r}: {got:.5f} vs {ref} (rel {rel:.2e})")
        rel = abs(prof.total.mean - total) / total
        c.check(rel < 0.01, f"m={m} total: {prof.total.mean:.5f} vs {total} (rel {rel:.2e})")
    return c.result


def criterion_3(size: str = "full") -> CriterionResult:
    c = _Checker(3, "exact CP^m formulas and Chern checks")
    for (m, q), text in COUNT_REFERENCE.items():
        got = cpm_expected_number(m, q)
        ref = parse_rational(text)
        c.check(str(got) == str(ref), f"N_{q}(CP^{m}) = {got.factored()}")
    for m, text in TOTAL_REFERENCE.items():
        got = cpm_total(m)
        ref = parse_rational(text)
        c.check(str(got) == str(ref), f"N(CP^{m}) = {got}")
    for m, text in CHERN_REFERENCE.items():
        try:
            got = chern_check(m)
            ok = str(got) == text == str(chern_polynomial(m))
        except AssertionError as exc:
            got, ok = exc, False
        c.check(ok, f"chern_check({m}) = {got}")
    return c.result


def _beta_profiles(size: str, seed: int, ms) -> dict:
    n = SIZES[size]["beta"]
    out = {}
    for m in ms:
        for i, method in enumerate(METHODS):
            out[m, method] = beta2_profile(m, method, n, seed + 10 * m + i)
    return out


def criterion_4(size: str = "full", seed: int = 404, profiles: dict | None = None) -> CriterionResult:
    c = _Checker(4, "Calabi coefficients beta_2q(1), beta_2q(2) within 3 sigma, each method")
    profiles = profiles or _beta_profiles(size, seed, (1, 2))
    for (m, q), target in BETA2_REFERENCE.items():
        for method in METHODS:
            est = profiles[m, method].values[q]
            z = est.zscore(target)
            c.check(z <= Z_BOUND, f"beta_2{q}({m}) [{method}] = {est.mean:.6g} +- {est.std_error:.1e} vs {target:.6g} (z={z:.2f})")
    return c.result


def criterion_5(size: str = "full", seed: int = 404, profiles: dict | None = None) -> CriterionResult:
    c = _Checker(5, "three beta_2q methods agree pairwise within combined 3 sigma, m = 1, 2, 3")
    profiles = profiles or _beta_profiles(size, seed, (1, 2, 3))
    for m in (1, 2, 3):
        for q in range(m, 2 * m + 1):
            for i in range(3):
                for j in range(i + 1, 3):
                    a = profiles[m, METHODS[i]].values[q]
                    b = profiles[m, METHODS[j]].values[q]
                    se = math.hypot(a.std_error, b.std_error)
                    z = _z(a.mean, se, b.mean)
                    c.check(z <= Z_BOUND, f"m={m} q={q} {METHODS[i]} vs {METHODS[j]}: {a.mean:.6g} / {b.mean:.6g} (z={z:.2f})")
    return c.result


def criterion_6(size: str = "full", seed: int = 606) -> CriterionResult:
    c = _Checker(6, "Haar identities and the signed-sum identity")
    n = SIZES[size]["identity"]
    for m, (lam, xi) in IZ_PARAMS.items():
        res = iz_check(m, lam, xi, n, seed + m)
        c.check(res.rel_err < 0.01, f"iz_check m={m}: rel_err {res.rel_err:.2e}")
    rng = np.random.default_rng(seed)
    for m in (2, 3):
        for k in range(5):
            a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            h = (a + a.T) / 2
            second, fourth = claim_g24_check(m, h, n, seed + 100 * m + k)
            c.check(second.rel_err < 0.01 and fourth.rel_err < 0.01,
                    f"claim_g24 m={m} H#{k}: rel_err {second.rel_err:.2e} / {fourth.rel_err:.2e}")
    for m in (1, 2, 3):
        prof = b0_profile(m, n, seed + 10 + m)
        signed = prof.signed
        target = math.factorial(m) / PI**m
        z = signed.zscore(target)
        c.check(z <= Z_BOUND, f"sum (-1)^(m+q) b0q({m}) = {signed.mean:.6f} vs m!/pi^m = {target:.6f} (z={z:.2f})")
    return c.result


def criterion_7(size: str = "full", seed: int = 707) -> CriterionResult:
    c = _Checker(7, "pi * Monte-Carlo density on CP^1 matches the exact counts")
    n = SIZES[size]["closed"]
    for big_n in (2, 3, 5):
        prof = density_profile(JetCovariance.projective(1, big_n), n, seed + big_n)
        for q in (1, 2):
            est = prof.values[q].scaled(PI)
            exact = float(cpm_expected_number(1, q)(big_n))
            z = est.zscore(exact)
            c.check(z <= Z_BOUND, f"N={big_n} q={q}: {est.mean:.5f} +- {est.std_error:.1e} vs {exact:.5f} (z={z:.2f})")
    return c.result


def criterion_8(size: str = "full") -> CriterionResult:
    c = _Checker(8, "exact series = curve expansion; fit on exact data recovers coefficients to 1e-6")
    sphere = CurveGeometry.round_sphere()
    for q in (1, 2, None):
        f = cpm_total(1) if q is None else cpm_expected_number(1, q)
        ser = series_expand(f, 3)
        curve = curve_expansion(sphere, q)
        exact = all(isinstance(x, Fraction) for x in curve.coeffs)
        c.check(exact and ser == curve,
                f"q={q or 'total'}: series {ser} vs curve {curve}")
    ladder = (10, 20, 40, 80)
    for q in (1, 2, None):
        f = cpm_total(1) if q is None else cpm_expected_number(1, q)
        data = [(n, float(f(n)) / PI) for n in ladder]
        fit = fit_expansion(data, 1, 3)
        target = [float(x) / PI for x in series_expand(f, 3).coeffs]
        err = max(abs(a - b) for a, b in zip(fit.coeffs, target))
        c.check(err <= 1e-6, f"fit q={q or 'total'}: max coefficient error {err:.2e}")
    return c.result


def criterion_9(size: str = "full", seed: int = 909) -> CriterionResult:
    c = _Checker(9, "empirical CP^1 critical points match exact means")
    trials = SIZES[size]["trials"]
    for big_n in (3, 5, 8):
        res = empirical_counts(big_n, trials, seed + big_n)
        for name, est, q in (("saddles", res.saddles, 1), ("maxima", res.maxima, 2)):
            exact = float(cpm_expected_number(1, q)(big_n))
            z = est.zscore(exact)
            c.check(z <= Z_BOUND, f"N={big_n} {name}: {est.mean:.4f} +- {est.std_error:.1e} vs {exact:.4f} (z={z:.2f})")
        c.check(res.euler_violation_rate < 0.01, f"N={big_n} euler violation rate {res.euler_violation_rate:.4f}")
        bad = [t for t, s, mx, flag in res.per_trial if flag is None and s - mx != big_n - 2]
        c.check(not bad, f"N={big_n} signed count N-2 on all {len(res.per_trial) - res.n_incomplete - res.n_degenerate} unflagged samples")
    return c.result


DETERMINISM_COMMANDS = [
    ["b0", "--dim", "2", "--samples", "200000"],
    ["b0q", "--dim", "2", "--samples", "200000"],
    ["morse-table", "--dim", "2", "--samples", "200000"],
    ["beta2q", "--dim", "2", "--method", "baugher", "--samples", "200000"],
    ["density", "--dim", "1", "--N", "3", "--samples", "200000"],
    ["iz-check", "--dim", "2", "--samples", "200000"],
    ["g24-check", "--dim", "2", "--samples", "200000"],
    ["fit", "--dim", "1", "--ladder", "4,8,16", "--samples", "100000"],
    ["sample-cp1", "--N", "4", "--trials", "200"],
]


def _run_cli(argv: list[str]) -> tuple[int, bytes]:
    from .cli import main

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue().encode()


def criterion_10(size: str = "full", seed: int = 1010) -> CriterionResult:
    c = _Checker(10, "stochastic commands byte-identical across worker counts 1, 2, 8")
    for cmd in DETERMINISM_COMMANDS:
        for fmt in ("json",):
            outs = []
            for workers in (1, 2, 8):
                argv = cmd + ["--seed", str(seed), "--workers", str(workers), "--format", fmt]
                outs.append(_run_cli(argv))
            same = all(o == outs[0] for o in outs) and outs[0][0] == 0 and outs[0][1]
            c.check(bool(same), f"{' '.join(cmd)}")
    return c.result


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_all(size: str = "full", only: list[int] | None = None) -> list[CriterionResult]:
    numbers = only or sorted(CRITERIA)
    profiles = None
    if {4, 5} & set(numbers):
        profiles = _beta_profiles(size, 404, (1, 2, 3) if 5 in numbers else (1, 2))
    out = []
    for k in numbers:
        t0 = time.perf_counter()
        if k in (4, 5):
            res = CRITERIA[k](size, profiles=profiles)
        else:
            res = CRITERIA[k](size)
        res.elapsed = time.perf_counter() - t0
        out.append(res)
    return out
