"""Small dense complex linear algebra and Gaussian/Haar sampling.

Complex symmetric matrices ``H`` are handled through their Hilbert-Schmidt
coordinates ``Hhat[j, q] = tau[j, q] * H[j, q]`` (``j <= q``, row-major),
with ``tau = sqrt(2)`` off the diagonal and ``1`` on it.  Jets ``(H, x)`` are
stored as a single coordinate vector of length ``m(m+1)/2 + 1`` whose last
slot is ``x``.

All complex Gaussians use the density ``exp(-|z|^2) / pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

__all__ = [
    "DEGENERATE",
    "Degenerate",
    "EigenConvergenceError",
    "CholeskyError",
    "RngStream",
    "JetPair",
    "sym_dim",
    "jet_dim",
    "hs_weights",
    "hs_vector",
    "from_hs_vector",
    "hs_to_matrices",
    "hermitian_eigh",
    "hermitian_eigenvalues",
    "matrix_index",
    "batch_index",
    "cholesky",
    "complex_normal",
    "sample_standard_jet",
    "sample_standard_jets",
    "sample_jet_with_covariance",
    "sample_jets_with_covariance",
    "sample_haar_unitary",
    "sample_haar_unitaries",
]


class Degenerate:
    """Marker returned by :func:`matrix_index` when an eigenvalue sits at zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DEGENERATE"

    def __bool__(self) -> bool:
        return False


DEGENERATE = Degenerate()


class EigenConvergenceError(ArithmeticError):
    def __init__(self, matrix: np.ndarray, off_norm: float):
        self.matrix = np.array(matrix, copy=True)
        self.off_norm = off_norm
        super().__init__(
            f"Jacobi iteration did not converge (off-diagonal norm {off_norm:.3e});"
            f" matrix:\n{self.matrix}"
        )


class CholeskyError(np.linalg.LinAlgError):
    def __init__(self, pivot: int, value: float):
        self.pivot = pivot
        self.value = value
        super().__init__(
            f"covariance is not positive definite: pivot {pivot} has value {value:.6g}"
        )


@dataclass(frozen=True)
class RngStream:
    """Deterministic random substream ``(seed, stream_id)``.

    Each Monte-Carlo chunk owns one stream, so results do not depend on how
    chunks are distributed over workers.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


class JetPair(NamedTuple):
    h: np.ndarray
    x: complex


def sym_dim(m: int) -> int:
    return m * (m + 1) // 2


def jet_dim(m: int) -> int:
    """Complex dimension d_m = (m^2 + m + 2)/2 of Sym(m, C) x C."""
    return sym_dim(m) + 1


@lru_cache(maxsize=None)
def _triu(m: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(m)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@lru_cache(maxsize=None)
def hs_weights(m: int) -> np.ndarray:
    rows, cols = _triu(m)
    tau = np.where(rows == cols, 1.0, math.sqrt(2.0))
    tau.setflags(write=False)
    return tau


def _check_symmetric(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.array_equal(h, h.T):
        raise ValueError("matrix is not complex symmetric")
    return h


def hs_vector(h: np.ndarray) -> np.ndarray:
    """Orthonormal-basis coordinates of a complex symmetric matrix."""
    h = _check_symmetric(h)
    rows, cols = _triu(h.shape[0])
    return hs_weights(h.shape[0]) * h[rows, cols]


def from_hs_vector(v: np.ndarray, m: int) -> np.ndarray:
    return hs_to_matrices(np.asarray(v, dtype=complex)[None, :], m)[0]


def hs_to_matrices(coords: np.ndarray, m: int) -> np.ndarray:
    """Batch inverse of :func:`hs_vector`: ``(n, m(m+1)/2) -> (n, m, m)``."""
    rows, cols = _triu(m)
    entries = coords[:, : sym_dim(m)] / hs_weights(m)
    out = np.zeros((coords.shape[0], m, m), dtype=complex)
    out[:, rows, cols] = entries
    out[:, cols, rows] = entries
    return out


def _check_hermitian(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.conj().T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    a[np.diag_indices_from(a)] = a.diagonal().real
    return a


def hermitian_eigh(
    a: np.ndarray, max_sweeps: int = 60, rtol: float = 1e-15
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi eigen-decomposition.

    Returns ascending eigenvalues ``w`` and unitary ``v`` with
    ``a = v @ diag(w) @ v^*``.
    """
    a = _check_hermitian(a)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if n == 1:
        return a.diagonal().real.copy(), v
    norm = float(np.linalg.norm(a))
    off = 0.0
    for _ in range(max_sweeps):
        off = float(np.sqrt(np.sum(np.abs(np.triu(a, 1)) ** 2)))
        if off <= rtol * norm or off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b == 0.0:
                    continue
                phase = apq / b
                theta = (a[q, q].real - a[p, p].real) / (2.0 * b)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # rotation acting on columns p, q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * np.conj(phase) * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * phase * vp + c * vq
    else:
        off = float(np.sqrt(np.sum(np.abs(np.triu(a, 1)) ** 2)))
        if off > 1e3 * rtol * norm:
            raise EigenConvergenceError(a, off)
    w = a.diagonal().real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(a: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    return hermitian_eigh(a, max_sweeps=max_sweeps)[0]


def matrix_index(a: np.ndarray, tol: float = 1e-12) -> int | Degenerate:
    """Number of negative eigenvalues, or ``DEGENERATE`` if one is within
    ``tol * max(1, spectral radius)`` of zero."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = hermitian_eigenvalues(a)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if np.any(np.abs(w) <= tol * scale):
        return DEGENERATE
    return int(np.count_nonzero(w < 0))


def batch_index(eigenvalues: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Vectorised :func:`matrix_index` on rows of eigenvalues; ``-1`` marks
    degenerate rows."""
    scale = np.maximum(1.0, np.abs(eigenvalues).max(axis=-1))
    degenerate = np.any(np.abs(eigenvalues) <= tol * scale[..., None], axis=-1)
    index = np.count_nonzero(eigenvalues < 0, axis=-1)
    return np.where(degenerate, -1, index)


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a Hermitian positive-definite matrix."""
    a = _check_hermitian(a)
    n = a.shape[0]
    low = np.zeros_like(a)
    for k in range(n):
        pivot = a[k, k].real - float(np.sum(np.abs(low[k, :k]) ** 2))
        if not pivot > 0.0:
            raise CholeskyError(k, pivot)
        low[k, k] = math.sqrt(pivot)
        for i in range(k + 1, n):
            low[i, k] = (a[i, k] - np.dot(low[i, :k], np.conj(low[k, :k]))) / low[k, k]
    return low


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    z = rng.standard_normal(size=(2,) + tuple(np.atleast_1d(size)))
    return (z[0] + 1j * z[1]) * math.sqrt(0.5)


def sample_standard_jets(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    """``n`` jet coordinate vectors with iid standard complex Gaussian entries."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return complex_normal(rng, (n, jet_dim(m)))


def sample_standard_jet(rng: RngStream | np.random.Generator, m: int) -> JetPair:
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    v = sample_standard_jets(gen, m, 1)[0]
    return JetPair(from_hs_vector(v[:-1], m), complex(v[-1]))


def sample_jets_with_covariance(
    rng: np.random.Generator, chol: np.ndarray, n: int
) -> np.ndarray:
    """Coordinates ``L g`` for standard complex Gaussian ``g``; rows are jets."""
    g = complex_normal(rng, (n, chol.shape[0]))
    return g @ chol.T


def sample_jet_with_covariance(
    rng: RngStream | np.random.Generator, lam: np.ndarray
) -> JetPair:
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    chol = cholesky(lam)
    d = chol.shape[0]
    m = int(round((math.sqrt(8 * (d - 1) + 1) - 1) / 2))
    if jet_dim(m) != d:
        raise ValueError(f"covariance size {d} is not a jet dimension")
    v = sample_jets_with_covariance(gen, chol, 1)[0]
    return JetPair(from_hs_vector(v[:-1], m), complex(v[-1]))


def sample_haar_unitaries(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    """``n`` Haar unitaries via QR of complex Ginibre matrices with the
    triangular factor's diagonal phases removed."""
    z = complex_normal(rng, (n, m, m))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    return q * phase[:, None, :]


def sample_haar_unitary(rng: RngStream | np.random.Generator, m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("m must be >= 1")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return sample_haar_unitaries(gen, m, 1)[0]
