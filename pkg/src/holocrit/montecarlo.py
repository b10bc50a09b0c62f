"""Chunked, worker-count independent Monte-Carlo driver.

A run of ``n_samples`` is cut into fixed-size chunks; chunk ``i`` draws from
``RngStream(seed, i)``.  Chunk moments are merged in chunk order with the
pairwise (Chan et al.) update, so the result is bit-identical whatever the
number of worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import RngStream

DEFAULT_CHUNK = 1 << 16
MAX_REJECTION_RATE = 1e-6
WORKERS_ENV = "HOLOCRIT_WORKERS"


class RejectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class MCEstimate:
    mean: float | complex
    std_error: float
    n_samples: int
    n_rejected: int
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.mean, complex):
            d["mean"] = [self.mean.real, self.mean.imag]
        return d

    def zscore(self, target: float | complex) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.mean == target else math.inf
        return abs(self.mean - target) / self.std_error

    def scaled(self, factor: float) -> "MCEstimate":
        return MCEstimate(
            self.mean * factor,
            self.std_error * abs(factor),
            self.n_samples,
            self.n_rejected,
            self.seed,
        )


class Moments:
    """Streaming mean / centred second moment for a vector of observables."""

    def __init__(self, k: int):
        self.n = 0
        self.mean = np.zeros(k)
        self.m2 = np.zeros(k)

    @classmethod
    def from_batch(cls, values: np.ndarray) -> "Moments":
        values = np.asarray(values, dtype=float)
        out = cls(values.shape[1])
        out.n = values.shape[0]
        if out.n:
            out.mean = values.mean(axis=0)
            out.m2 = ((values - out.mean) ** 2).sum(axis=0)
        return out

    def merge(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean.copy(), other.m2.copy()
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.n / n)
        self.m2 = self.m2 + other.m2 + delta**2 * (self.n * other.n / n)
        self.n = n
        return self

    def variance(self) -> np.ndarray:
        if self.n < 2:
            return np.zeros_like(self.m2)
        return self.m2 / (self.n - 1)

    def std_error(self) -> np.ndarray:
        if self.n == 0:
            return np.full_like(self.m2, np.inf)
        return np.sqrt(self.variance() / self.n)


@dataclass
class ChunkResult:
    moments: Moments
    rejected: int


Kernel = Callable[..., tuple[np.ndarray, int]]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def chunk_sizes(n_samples: int, chunk: int = DEFAULT_CHUNK) -> list[int]:
    full, rest = divmod(n_samples, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _run_chunk(job) -> ChunkResult:
    kernel, seed, stream_id, size, args = job
    gen = RngStream(seed, stream_id).generator()
    values, rejected = kernel(gen, size, *args)
    return ChunkResult(Moments.from_batch(values), rejected)


def run_chunks(
    kernel: Kernel,
    n_samples: int,
    seed: int,
    args: Sequence = (),
    workers: int | None = None,
    chunk: int = DEFAULT_CHUNK,
    median_of_means: int = 0,
) -> tuple[Moments, int, np.ndarray | None]:
    """Evaluate ``kernel(gen, size, *args) -> (values[n_acc, k], n_rejected)``
    over all chunks.  Returns merged moments, total rejections and, when
    ``median_of_means`` > 1, the median of group means."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    workers = default_workers() if workers is None else max(1, workers)
    jobs = [(kernel, seed, i, s, tuple(args)) for i, s in enumerate(chunk_sizes(n_samples, chunk))]
    if workers == 1 or len(jobs) == 1:
        results = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    total = Moments(results[0].moments.mean.shape[0])
    rejected = 0
    for res in results:
        total.merge(res.moments)
        rejected += res.rejected
    mom = None
    if median_of_means > 1:
        groups = np.array_split(np.arange(len(results)), min(median_of_means, len(results)))
        means = []
        for g in groups:
            acc = Moments(total.mean.shape[0])
            for i in g:
                acc.merge(results[i].moments)
            means.append(acc.mean)
        mom = np.median(np.array(means), axis=0)
    if rejected > MAX_REJECTION_RATE * n_samples:
        raise RejectionError(
            f"{rejected} degenerate samples out of {n_samples} exceeds the"
            f" {MAX_REJECTION_RATE:g} rejection budget"
        )
    return total, rejected, mom


def estimates_from(
    moments: Moments, rejected: int, seed: int, scale: float = 1.0, mom: np.ndarray | None = None
) -> list[MCEstimate]:
    means = moments.mean if mom is None else mom
    errs = moments.std_error()
    return [
        MCEstimate(float(means[i] * scale), float(errs[i] * abs(scale)), moments.n, rejected, seed)
        for i in range(means.shape[0])
    ]
