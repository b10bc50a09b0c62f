"""Direct sampling of critical points of random sections of O(N) -> CP^1.

A section is ``f(z) = sum_j c_j sqrt(binom(N, j)) z^j`` in the affine chart,
with iid standard complex Gaussian ``c_j``.  Its Fubini-Study norm is
``|f(z)| (1 + |z|^2)^(-N/2)`` and the critical points solve

    G(z) = f'(z) (1 + |z|^2) - N conj(z) f(z) = 0.

Each of the two standard charts is searched in its closed unit disk by damped
Newton iteration on the real 2-D system, started from a sunflower grid.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .linalg import RngStream, complex_normal
from .montecarlo import MCEstimate, Moments, default_workers

SEEDS_PER_N = 40
DEDUP_CHORDAL = 1e-6
RESIDUAL_TOL = 1e-9
DEGENERATE_TOL = 1e-8
ZERO_TOL = 1e-10
NEWTON_ITERS = 80
CSV_COLUMNS = ("trial", "chart", "re", "im", "index", "residual", "log_norm")


class DegenerateCriticalPoint(ArithmeticError):
    pass


@dataclass(frozen=True)
class RandomSection:
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.degree + 1,):
            raise ValueError(f"need {self.degree + 1} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def chart_coeffs(self, chart: int) -> np.ndarray:
        """Monomial coefficients ``a_j`` of f in chart 0 (z) or chart 1 (w = 1/z)."""
        n = self.degree
        binom = np.array([math.comb(n, j) for j in range(n + 1)], dtype=float)
        a = self.coeffs * np.sqrt(binom)
        return a if chart == 0 else a[::-1].copy()

    @property
    def scale(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True)
class CriticalPointRecord:
    chart: int
    location: complex
    morse_index: int
    residual: float
    log_norm: float

    def sphere_point(self) -> np.ndarray:
        return _to_sphere(np.array([self.location]), self.chart)[0]


class CriticalPoints(list):
    """List of :class:`CriticalPointRecord` with an optional ``flag`` naming
    why the set may be incomplete or unusable."""

    def __init__(self, records: Iterable[CriticalPointRecord] = (), flag: str | None = None):
        super().__init__(records)
        self.flag = flag

    def counts(self) -> tuple[int, int]:
        saddles = sum(1 for r in self if r.morse_index == 1)
        return saddles, len(self) - saddles


def sample_section(rng, n: int) -> RandomSection:
    if n < 2:
        raise ValueError("N must be >= 2")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return RandomSection(n, complex_normal(gen, n + 1))


# ----------------------------------------------------------------------------
# evaluation


def _derivs(a: np.ndarray, z: np.ndarray):
    """f, f', f'' at the points z (Horner)."""
    f = np.zeros_like(z)
    d1 = np.zeros_like(z)
    d2 = np.zeros_like(z)
    for c in a[::-1]:
        d2 = d2 * z + 2.0 * d1
        d1 = d1 * z + f
        f = f * z + c
    return f, d1, d2


def _critical_map(a, n, z):
    f, d1, d2 = _derivs(a, z)
    r2 = 1.0 + np.abs(z) ** 2
    g = d1 * r2 - n * np.conj(z) * f
    ga = d2 * r2 + (1 - n) * np.conj(z) * d1
    gb = d1 * z - n * f
    return g, ga, gb, f, d1, d2


def _relative_residual(g, f, d1, z, n):
    r2 = 1.0 + np.abs(z) ** 2
    scale = np.abs(d1) * r2 + n * np.abs(z) * np.abs(f)
    with np.errstate(divide="ignore", invalid="ignore"):
        res = np.abs(g) / scale
    return np.where(scale > 0, res, np.where(np.abs(g) == 0, 0.0, np.inf))


def newton(a: np.ndarray, n: int, z0: np.ndarray, iters: int = NEWTON_ITERS, max_step: float = 0.25):
    """Damped Newton on Re/Im of G, vectorised over starting points."""
    z = np.asarray(z0, dtype=complex).copy()
    with np.errstate(all="ignore"):
        return _newton_loop(a, n, z, iters, max_step)


def _newton_loop(a, n, z, iters, max_step):
    for _ in range(iters):
        g, ga, gb, *_ = _critical_map(a, n, z)
        r = -g
        den = np.abs(ga) ** 2 - np.abs(gb) ** 2
        step = (np.conj(ga) * r - gb * np.conj(r)) / den
        step = np.where(np.isfinite(step), step, 0.0)
        size = np.abs(step)
        lim = max_step * (1.0 + np.abs(z))
        step = np.where(size > lim, step * lim / np.where(size > 0, size, 1.0), step)
        z = z + step
        # anything drifting far outside the disk belongs to the other chart
        z = np.where(np.abs(z) > 4.0, 4.0 * z / np.abs(z), z)
        z = np.where(np.isfinite(z), z, 0.0)
    return z


def _sunflower(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    r = np.sqrt(i / count)
    theta = i * math.pi * (3.0 - math.sqrt(5.0))
    return r * np.exp(1j * theta)


def _to_sphere(z: np.ndarray, chart: int) -> np.ndarray:
    w = z if chart == 0 else np.where(z == 0, np.inf, 1.0 / np.where(z == 0, 1.0, z))
    out = np.empty((len(z), 3))
    inf = ~np.isfinite(w)
    ww = np.where(inf, 0.0, w)
    r2 = np.abs(ww) ** 2
    out[:, 0] = 2 * ww.real / (1 + r2)
    out[:, 1] = 2 * ww.imag / (1 + r2)
    out[:, 2] = (r2 - 1) / (1 + r2)
    out[inf] = [0.0, 0.0, 1.0]
    return out


def log_norm(a: np.ndarray, n: int, z: complex) -> float:
    f, _, _ = _derivs(a, np.array([z]))
    return float(np.log(np.abs(f[0])) - 0.5 * n * np.log1p(abs(z) ** 2))


def _hessian_terms(a: np.ndarray, n: int, z: complex) -> tuple[complex, float]:
    f, d1, d2 = (v[0] for v in _derivs(a, np.array([z], dtype=complex)))
    r2 = 1.0 + abs(z) ** 2
    phi_zz = (d2 * f - d1 * d1) / (f * f) + n * np.conj(z) ** 2 / r2**2
    phi_zzbar = -n / r2**2
    return complex(phi_zz), float(phi_zzbar)


def morse_classify_chart(a: np.ndarray, n: int, z: complex) -> int:
    """Morse index of log||s|| at a critical point in chart coordinates."""
    phi_zz, phi_zzbar = _hessian_terms(a, n, z)
    # real Hessian of log|f|^2 - N log(1+|z|^2) has eigenvalues 2(phi_zzbar +- |phi_zz|)
    det = 4.0 * (phi_zzbar**2 - abs(phi_zz) ** 2)
    trace = 4.0 * phi_zzbar
    scale = 4.0 * phi_zzbar**2
    if abs(det) < DEGENERATE_TOL * scale:
        raise DegenerateCriticalPoint(f"near-singular Hessian at z={z:.6g} (det={det:.3g})")
    if det < 0:
        return 1
    if trace < 0:
        return 2
    raise ArithmeticError("local minimum of log||s|| at a nonzero point is impossible")


def morse_classify(s: RandomSection, z: complex, chart: int = 0) -> int:
    return morse_classify_chart(s.chart_coeffs(chart), s.degree, z)


def _search(s: RandomSection, seeds_per_chart: int) -> tuple[list, bool]:
    n = s.degree
    grid = _sunflower(seeds_per_chart)
    found_z: list[complex] = []
    found_chart: list[int] = []
    found_res: list[float] = []
    pts = np.zeros((0, 3))
    degenerate = False
    for chart in (0, 1):
        a = s.chart_coeffs(chart)
        z = newton(a, n, grid)
        # two polishing steps without damping
        z = newton(a, n, z, iters=2, max_step=np.inf)
        g, _, _, f, d1, _ = _critical_map(a, n, z)
        res = _relative_residual(g, f, d1, z, n)
        norm_f = np.abs(f) / (1.0 + np.abs(z) ** 2) ** (0.5 * n)
        ok = (res < RESIDUAL_TOL) & (np.abs(z) <= 1.0 + 1e-6) & (norm_f > ZERO_TOL * s.scale)
        cand, cres = z[ok], res[ok]
        sph = _to_sphere(cand, chart)
        for zi, ri, pi in zip(cand, cres, sph):
            if len(pts) and np.min(np.linalg.norm(pts - pi, axis=1)) < DEDUP_CHORDAL:
                continue
            pts = np.vstack([pts, pi])
            found_z.append(complex(zi))
            found_chart.append(chart)
            found_res.append(float(ri))
    records = []
    for zi, ch, ri in zip(found_z, found_chart, found_res):
        a = s.chart_coeffs(ch)
        try:
            idx = morse_classify_chart(a, n, zi)
        except DegenerateCriticalPoint:
            degenerate = True
            continue
        records.append(CriticalPointRecord(ch, zi, idx, ri, log_norm(a, n, zi)))
    return records, degenerate


def find_critical_points(s: RandomSection, seeds_per_chart: int | None = None, retries: int = 1) -> CriticalPoints:
    """All critical points of ||s|| on the sphere.

    The signed count ``#saddles - #maxima = N - 2`` holds for every generic
    section; when it fails the search is repeated with 4x denser seeding, and
    a persisting failure is reported through ``flag``.
    """
    n = s.degree
    seeds = seeds_per_chart or SEEDS_PER_N * n
    for attempt in range(retries + 1):
        records, degenerate = _search(s, seeds)
        if degenerate:
            return CriticalPoints(records, "degenerate")
        out = CriticalPoints(records)
        saddles, maxima = out.counts()
        if saddles - maxima == n - 2:
            return out
        seeds *= 4
    out.flag = "incomplete"
    return out


def rotate_section(s: RandomSection, u: np.ndarray) -> RandomSection:
    """Pull back s by the unitary change of homogeneous coordinates ``u``."""
    n = s.degree
    a = s.chart_coeffs(0)
    # P(Z0, Z1) = sum a_j Z0^(N-j) Z1^j; substitute (Z0, Z1) -> u @ (Z0, Z1)
    z0 = np.array([u[0, 0], u[0, 1]])  # coefficients of Z0', as poly in t = Z1/Z0 (low first)
    z1 = np.array([u[1, 0], u[1, 1]])
    out = np.zeros(n + 1, dtype=complex)
    for j, aj in enumerate(a):
        p = np.array([aj], dtype=complex)
        for _ in range(n - j):
            p = np.convolve(p, z0)
        for _ in range(j):
            p = np.convolve(p, z1)
        out += p
    binom = np.array([math.comb(n, j) for j in range(n + 1)], dtype=float)
    return RandomSection(n, out / np.sqrt(binom))


# ----------------------------------------------------------------------------
# empirical averages


@dataclass
class EmpiricalCounts:
    degree: int
    trials: int
    seed: int
    saddles: MCEstimate
    maxima: MCEstimate
    total: MCEstimate
    euler_violation_rate: float
    n_degenerate: int
    n_incomplete: int
    records: list = field(default_factory=list, repr=False)
    per_trial: list = field(default_factory=list, repr=False)

    def to_rows(self) -> list[dict]:
        rows = []
        for name, est in (("saddles", self.saddles), ("maxima", self.maxima), ("total", self.total)):
            rows.append({"N": self.degree, "index": name, **est.to_dict()})
        return rows


def _trial_block(job):
    n, seed, start, stop, keep = job
    out = []
    for t in range(start, stop):
        s = sample_section(RngStream(seed, t), n)
        pts = find_critical_points(s)
        saddles, maxima = pts.counts()
        recs = list(pts) if keep else []
        out.append((t, saddles, maxima, pts.flag, recs))
    return out


def empirical_counts(
    n: int,
    trials: int,
    seed: int,
    workers: int | None = None,
    keep_records: bool = False,
    block: int = 64,
) -> EmpiricalCounts:
    """Mean numbers of saddles and maxima over ``trials`` random sections.

    Trial ``t`` draws from ``RngStream(seed, t)``.  Flagged samples
    (degenerate or failing the signed-count identity) are excluded from the
    means and counted separately.
    """
    if n < 2:
        raise ValueError("N must be >= 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = default_workers() if workers is None else max(1, workers)
    jobs = [(n, seed, i, min(i + block, trials), keep_records) for i in range(0, trials, block)]
    if workers == 1 or len(jobs) == 1:
        results = [_trial_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_block, jobs))
    values = []
    degenerate = incomplete = 0
    records = []
    per_trial = []
    for blk in results:
        for t, saddles, maxima, flag, recs in blk:
            per_trial.append((t, saddles, maxima, flag))
            if flag == "degenerate":
                degenerate += 1
            elif flag == "incomplete":
                incomplete += 1
            else:
                values.append((saddles, maxima, saddles + maxima))
            records.extend((t, r) for r in recs)
    mom = Moments.from_batch(np.array(values, dtype=float).reshape(-1, 3))
    err = mom.std_error()
    rejected = degenerate + incomplete
    ests = [MCEstimate(float(mom.mean[i]), float(err[i]), mom.n, rejected, seed) for i in range(3)]
    return EmpiricalCounts(
        n, trials, seed, ests[0], ests[1], ests[2], incomplete / trials, degenerate, incomplete, records, per_trial
    )


def write_records_csv(records: Iterable[tuple[int, CriticalPointRecord]], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for t, r in records:
        w.writerow([t, "0" if r.chart == 0 else "inf", repr(r.location.real), repr(r.location.imag),
                    r.morse_index, repr(r.residual), repr(r.log_norm)])
