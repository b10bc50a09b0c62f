"""Monte-Carlo estimators for the Gaussian matrix integrals over Sym(m, C) x C.

Every estimator draws jets ``(H, x)`` from a complex Gaussian (standard, or
with covariance ``Lambda`` through its Cholesky factor) and averages
``weight * |det(factor * H H^* - |x|^2 I)|``, stratified by the number of
negative eigenvalues ``k`` of the same matrix.  The Morse index is
``q = m + k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.special import gammainc

from .linalg import (
    batch_index,
    cholesky,
    complex_normal,
    hs_to_matrices,
    jet_dim,
    sample_haar_unitaries,
    sym_dim,
)
from .montecarlo import MCEstimate, estimates_from, run_chunks

Method = Literal["gamma", "f_average", "baugher"]
METHODS: tuple[str, ...] = ("gamma", "f_average", "baugher")
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class JetCovariance:
    """Covariance data ``(A, Lambda)`` of the critical-point density formula.

    ``lam`` is written in the orthonormal basis of Sym(m, C) (row-major
    ``j <= q``) followed by the value slot ``x``.
    """

    a_block: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a_block, dtype=complex)
        lam = np.asarray(self.lam, dtype=complex)
        m = a.shape[0]
        if a.shape != (m, m) or lam.shape != (jet_dim(m), jet_dim(m)):
            raise ValueError(
                f"A must be m x m and Lambda d_m x d_m; got {a.shape} and {lam.shape}"
            )
        object.__setattr__(self, "a_block", a)
        object.__setattr__(self, "lam", lam)
        cholesky(a)  # raises on a non positive-definite A
        _ = self.chol

    @property
    def dim(self) -> int:
        return self.a_block.shape[0]

    @cached_property
    def chol(self) -> np.ndarray:
        return cholesky(self.lam)

    @property
    def det_a(self) -> float:
        return float(np.linalg.det(self.a_block).real)

    @classmethod
    def diagonal(cls, m: int, a_diag, lam_diag) -> "JetCovariance":
        a = np.diag(np.broadcast_to(np.asarray(a_diag, dtype=float), (m,)))
        return cls(a, np.diag(np.asarray(lam_diag, dtype=float)))

    @classmethod
    def projective(cls, m: int, n: int) -> "JetCovariance":
        """Normalised covariance for O(N) -> CP^m with the Fubini-Study metric."""
        lam = [2.0 * n * (n - 1)] * sym_dim(m) + [float(n * n)]
        return cls.diagonal(m, float(n), lam)

    @classmethod
    def cp1_times_elliptic(cls, m: int, n: int) -> "JetCovariance":
        """Normalised covariance for CP^1 x E^(m-1) with the product bundle."""
        lam = [2.0 * n * (n - 1)] + [2.0 * n * n] * (sym_dim(m) - 1) + [float(n * n)]
        return cls.diagonal(m, float(n), lam)


@dataclass
class MorseProfile:
    """Per-Morse-index estimates ``values[q]`` for ``q = m..2m``."""

    m: int
    values: dict[int, MCEstimate]
    total: MCEstimate
    signed: MCEstimate
    extra: dict = field(default_factory=dict)

    def means(self) -> list[float]:
        return [self.values[q].mean for q in range(self.m, 2 * self.m + 1)]


# ----------------------------------------------------------------------------
# kernels (module level so they pickle into worker processes)


def _weight(method: str | None, h: np.ndarray, mu: np.ndarray, x2: np.ndarray, m: int):
    if method is None:
        return None
    if method == "gamma":
        a = np.abs(h[:, 0, 0]) ** 2
        return 0.5 * a * a - 2.0 * a + 1.0
    if method == "f_average":
        t1 = mu.sum(axis=1)
        t2 = (mu * mu).sum(axis=1)
        return (
            1.0
            - 4.0 * t1 / (m * (m + 1))
            + (4.0 * t1 * t1 + 8.0 * t2) / (m * (m + 1) * (m + 2) * (m + 3))
        )
    if method == "baugher":
        return x2
    raise ValueError(f"unknown method {method!r}")


def _gram_eigenvalues(h: np.ndarray) -> np.ndarray:
    m = h.shape[-1]
    if m == 1:
        return (np.abs(h[:, 0, 0]) ** 2)[:, None]
    gram = np.einsum("bij,bkj->bik", h, h.conj())
    return np.linalg.eigvalsh(gram)


def interval_integrals(roots: np.ndarray, extra_power: int = 0) -> np.ndarray:
    """``int_{I_k} |prod_i (r_i - t)| t^extra_power e^(-t) dt`` for every sample.

    ``roots`` has shape (n, m), sorted ascending and nonnegative; the
    intervals are ``I_0 = [0, r_1)``, ``I_k = [r_k, r_(k+1))`` and
    ``I_m = [r_m, inf)``, so on ``I_k`` exactly k factors are negative.
    Each piece is expanded around its left end and integrated with the
    regularised incomplete gamma function.
    """
    n, m = roots.shape
    deg = m + extra_power
    j = np.arange(deg + 1)
    fact = np.array([math.factorial(int(i)) for i in j], dtype=float)
    lower = np.concatenate([np.zeros((n, 1)), roots], axis=1)
    upper = np.concatenate([roots, np.full((n, 1), np.inf)], axis=1)
    out = np.empty((n, m + 1))
    for k in range(m + 1):
        a = lower[:, k]
        c = np.zeros((n, deg + 1))
        c[:, 0] = 1.0
        for i in range(m):
            d = (roots[:, i] - a)[:, None]
            shifted = np.concatenate([np.zeros((n, 1)), c[:, :-1]], axis=1)
            c = d * c - shifted
        for _ in range(extra_power):
            shifted = np.concatenate([np.zeros((n, 1)), c[:, :-1]], axis=1)
            c = a[:, None] * c + shifted
        length = (upper[:, k] - a)[:, None]
        inc = gammainc(j + 1, length)
        val = np.exp(-a) * (c * fact * inc).sum(axis=1)
        out[:, k] = val if k % 2 == 0 else -val
    return np.maximum(out, 0.0)


def _x_separable(chol: np.ndarray | None) -> bool:
    return chol is None or not np.any(chol[-1, :-1])


def jet_kernel(gen, n, m, chol, factor, method, stratify=True, conditional=True):
    """Columns: ``w |det|`` on each stratum k = 0..m, total, signed sum.

    With ``conditional`` (and x uncorrelated with H) the value slot is
    integrated out exactly given H, which leaves the estimator unbiased and
    removes the variance coming from |x|^2; otherwise x is sampled and the
    stratum comes from the sign pattern of the sampled matrix.
    """
    if chol is None:
        coords = complex_normal(gen, (n, jet_dim(m)))
    else:
        coords = complex_normal(gen, (n, chol.shape[0])) @ chol.T
    h = hs_to_matrices(coords, m)
    mu = _gram_eigenvalues(h)
    if conditional and _x_separable(chol):
        var_x = 1.0 if chol is None else float(abs(chol[-1, -1]) ** 2)
        extra = 1 if method == "baugher" else 0
        strata = interval_integrals(factor * mu / var_x, extra) * var_x ** (m + extra)
        w = None if method in (None, "baugher") else _weight(method, h, mu, None, m)
        if w is not None:
            strata = strata * w[:, None]
        val = strata.sum(axis=1)
        if not stratify:
            return val[:, None], 0
        signs = np.where(np.arange(m + 1) % 2 == 0, 1.0, -1.0)
        return np.column_stack([strata, val, strata @ signs]), 0
    x2 = np.abs(coords[:, -1]) ** 2
    eig = factor * mu - x2[:, None]
    absdet = np.abs(np.prod(eig, axis=1))
    w = _weight(method, h, mu, x2, m)
    val = absdet if w is None else w * absdet
    if not stratify:
        return val[:, None], 0
    k = batch_index(eig, DEGENERACY_TOL)
    keep = k >= 0
    k, val = k[keep], val[keep]
    strata = (k[:, None] == np.arange(m + 1)[None, :]) * val[:, None]
    signed = np.where(k % 2 == 0, val, -val)
    return np.column_stack([strata, val, signed]), int(n - keep.sum())


def _profile(m, n_samples, seed, chol, factor, method, scale, workers, median_of_means=0, conditional=True):
    mom, rejected, mmean = run_chunks(
        jet_kernel,
        n_samples,
        seed,
        args=(m, chol, factor, method, True, conditional),
        workers=workers,
        median_of_means=median_of_means,
    )
    est = estimates_from(mom, rejected, seed, scale, mmean)
    values = {m + k: est[k] for k in range(m + 1)}
    return MorseProfile(m, values, est[m + 1], est[m + 2])


def _check_m(m: int):
    if m < 1:
        raise ValueError("m must be >= 1")


def _check_q(m: int, q: int):
    _check_m(m)
    if not m <= q <= 2 * m:
        raise ValueError(f"Morse index q={q} outside [{m}, {2 * m}]")


# ----------------------------------------------------------------------------
# universal constants


def estimate_b0(
    m: int, n_samples: int, seed: int, workers: int | None = None, conditional: bool = True
) -> MCEstimate:
    """Leading universal density b0(m)."""
    _check_m(m)
    mom, _, _ = run_chunks(
        jet_kernel, n_samples, seed, args=(m, None, 2.0, None, False, conditional), workers=workers
    )
    return estimates_from(mom, 0, seed, math.pi ** (-m))[0]


def b0_profile(
    m: int,
    n_samples: int,
    seed: int,
    workers: int | None = None,
    median_of_means: int = 0,
    conditional: bool = True,
) -> MorseProfile:
    """All b0q(m), q = m..2m, from one sample set (plus their sum and signed sum)."""
    _check_m(m)
    return _profile(m, n_samples, seed, None, 2.0, None, math.pi ** (-m), workers, median_of_means, conditional)


def estimate_b0q(m: int, q: int, n_samples: int, seed: int, workers: int | None = None) -> MCEstimate:
    _check_q(m, q)
    return b0_profile(m, n_samples, seed, workers).values[q]


def morse_leading_table(
    m: int, n_samples: int, seed: int, workers: int | None = None, conditional: bool = True
) -> MorseProfile:
    """Leading coefficients n_q(m) = pi^m / m! * b0q(m) of the CP^m counts.

    ``signed`` holds the alternating sum of the b0q (target m!/pi^m).
    """
    if not 1 <= m <= 6:
        raise ValueError("morse_leading_table supports 1 <= m <= 6")
    prof = _profile(
        m, n_samples, seed, None, 2.0, None, 1.0 / math.factorial(m), workers, conditional=conditional
    )
    prof.signed = prof.signed.scaled(math.factorial(m) / math.pi**m)
    return prof


# ----------------------------------------------------------------------------
# Calabi coefficients


def _beta_scale(m: int, method: str) -> float:
    if method in ("gamma", "f_average"):
        return 0.25 * math.pi ** (-m)
    if method == "baugher":
        return math.pi ** (-m) / ((m + 1) * (m + 2) * (m + 3))
    raise ValueError(f"unknown method {method!r}; choose one of {METHODS}")


def beta2_profile(
    m: int, method: str, n_samples: int, seed: int, workers: int | None = None, conditional: bool = True
) -> MorseProfile:
    _check_m(m)
    scale = _beta_scale(m, method)
    return _profile(m, n_samples, seed, None, 2.0, method, scale, workers, conditional=conditional)


def estimate_beta2q(
    m: int, q: int, method: str, n_samples: int, seed: int, workers: int | None = None
) -> MCEstimate:
    """Calabi coefficient beta_2q(m) by one of three Gaussian integral forms."""
    _check_q(m, q)
    return beta2_profile(m, method, n_samples, seed, workers).values[q]


# ----------------------------------------------------------------------------
# general covariance


def density_profile(
    cov: JetCovariance, n_samples: int, seed: int, workers: int | None = None, conditional: bool = True
) -> MorseProfile:
    m = cov.dim
    scale = math.pi ** (-m) / cov.det_a
    return _profile(m, n_samples, seed, cov.chol, 1.0, None, scale, workers, conditional=conditional)


def density_general(
    cov: JetCovariance, n_samples: int, seed: int, workers: int | None = None, conditional: bool = True
) -> MCEstimate:
    """Expected critical-point density relative to the curvature volume form."""
    m = cov.dim
    mom, _, _ = run_chunks(
        jet_kernel, n_samples, seed, args=(m, cov.chol, 1.0, None, False, conditional), workers=workers
    )
    return estimates_from(mom, 0, seed, math.pi ** (-m) / cov.det_a)[0]


def density_morse_general(
    cov: JetCovariance, q: int, n_samples: int, seed: int, workers: int | None = None
) -> MCEstimate:
    _check_q(cov.dim, q)
    return density_profile(cov, n_samples, seed, workers).values[q]


# ----------------------------------------------------------------------------
# Haar identity checks


@dataclass(frozen=True)
class IdentityCheck:
    mc: MCEstimate
    exact: float | complex
    rel_err: float

    def to_dict(self) -> dict:
        exact = [self.exact.real, self.exact.imag] if isinstance(self.exact, complex) else self.exact
        return {**self.mc.to_dict(), "exact": exact, "rel_err": self.rel_err}


def _vandermonde(v: np.ndarray) -> float:
    out = 1.0
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            out *= v[i] - v[j]
    return out


def iz_exact(lam, xi) -> complex:
    """Closed form of the Haar average of exp(i Tr(D(xi) h D(lam) h^*))."""
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float)
    m = len(lam)
    if len(xi) != m:
        raise ValueError("lambda and xi must have the same length")
    dl, dx = _vandermonde(lam), _vandermonde(xi)
    if dl == 0.0 or dx == 0.0:
        raise ValueError("iz_check needs pairwise distinct entries in lambda and xi")
    phase = (-1j) ** (m * (m - 1) // 2)
    fact = math.prod(math.factorial(j) for j in range(1, m))
    det = np.linalg.det(np.exp(1j * np.outer(lam, xi)))
    return complex(phase * fact * det / (dl * dx))


def _iz_kernel(gen, n, lam, xi):
    u = sample_haar_unitaries(gen, len(lam), n)
    theta = np.einsum("j,bjk,k->b", xi, np.abs(u) ** 2, lam)
    return np.column_stack([np.cos(theta), np.sin(theta)]), 0


def iz_check(m: int, lambda_diag, xi_diag, n_samples: int, seed: int, workers: int | None = None) -> IdentityCheck:
    lam = np.asarray(lambda_diag, dtype=float)
    xi = np.asarray(xi_diag, dtype=float)
    if len(lam) != m or len(xi) != m:
        raise ValueError(f"expected {m} eigenvalues for lambda and xi")
    exact = iz_exact(lam, xi)
    mom, _, _ = run_chunks(_iz_kernel, n_samples, seed, args=(lam, xi), workers=workers)
    se = float(np.hypot(*mom.std_error()))
    mean = complex(mom.mean[0], mom.mean[1])
    est = MCEstimate(mean, se, mom.n, 0, seed)
    return IdentityCheck(est, exact, abs(mean - exact) / abs(exact))


def g24_exact(h: np.ndarray) -> tuple[float, float]:
    h = np.asarray(h, dtype=complex)
    m = h.shape[0]
    p = h @ h.conj().T
    t1 = float(np.trace(p).real)
    t2 = float(np.trace(p @ p).real)
    second = 2.0 * t1 / (m * (m + 1))
    fourth = (8.0 * t1 * t1 + 16.0 * t2) / (m * (m + 1) * (m + 2) * (m + 3))
    return second, fourth


def _g24_kernel(gen, n, h):
    u = sample_haar_unitaries(gen, h.shape[0], n)
    v = u[:, 0, :]
    s = np.abs(np.einsum("bj,jk,bk->b", v, h, v)) ** 2
    return np.column_stack([s, s * s]), 0


def claim_g24_check(
    m: int, h: np.ndarray, n_samples: int, seed: int, workers: int | None = None
) -> tuple[IdentityCheck, IdentityCheck]:
    """Haar second and fourth moments of the (1,1) entry of g H g^t."""
    if m < 2:
        raise ValueError("claim_g24_check needs m >= 2")
    h = np.asarray(h, dtype=complex)
    if h.shape != (m, m) or not np.allclose(h, h.T):
        raise ValueError("h must be an m x m complex symmetric matrix")
    exact = g24_exact(h)
    mom, _, _ = run_chunks(_g24_kernel, n_samples, seed, args=(h,), workers=workers)
    ests = estimates_from(mom, 0, seed)
    out = []
    for est, ex in zip(ests, exact):
        err = abs(est.mean - ex)
        out.append(IdentityCheck(est, ex, err / ex if ex != 0 else err))
    return out[0], out[1]
