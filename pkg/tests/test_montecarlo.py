import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holocrit.montecarlo import (
    MCEstimate,
    Moments,
    RejectionError,
    chunk_sizes,
    estimates_from,
    run_chunks,
)


@settings(max_examples=50, deadline=None)
@given(sizes=st.lists(st.integers(0, 40), min_size=1, max_size=6), seed=st.integers(0, 1000))
def test_merge_matches_single_pass(sizes, seed):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((sum(sizes), 2)) * 3 + 1
    total = Moments(2)
    start = 0
    for s in sizes:
        total.merge(Moments.from_batch(data[start:start + s]))
        start += s
    if len(data) == 0:
        assert total.n == 0
        return
    assert total.n == len(data)
    assert np.allclose(total.mean, data.mean(axis=0))
    if len(data) > 1:
        assert np.allclose(total.variance(), data.var(axis=0, ddof=1))


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]


def _uniform_kernel(gen, n):
    return gen.random((n, 1)), 0


def _rejecting_kernel(gen, n):
    return gen.random((n - 1, 1)), 1


def test_run_chunks_independent_of_workers():
    a = run_chunks(_uniform_kernel, 50000, 3, chunk=8000, workers=1)[0]
    b = run_chunks(_uniform_kernel, 50000, 3, chunk=8000, workers=3)[0]
    assert a.n == b.n == 50000
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.m2, b.m2)
    assert abs(a.mean[0] - 0.5) < 5 * a.std_error()[0]


def test_rejection_budget_enforced():
    with pytest.raises(RejectionError):
        run_chunks(_rejecting_kernel, 1000, 1, chunk=100)


def test_median_of_means_returned():
    mom, rej, mmean = run_chunks(_uniform_kernel, 40000, 5, chunk=5000, median_of_means=4)
    assert mmean.shape == (1,) and abs(mmean[0] - 0.5) < 0.01
    est = estimates_from(mom, rej, 5, 2.0, mmean)[0]
    assert est.mean == pytest.approx(2 * mmean[0])


def test_estimate_helpers():
    e = MCEstimate(1.5, 0.5, 100, 0, 9)
    assert e.zscore(1.0) == pytest.approx(1.0)
    assert e.scaled(-2).mean == -3.0 and e.scaled(-2).std_error == 1.0
    assert MCEstimate(1j, 0.1, 1, 0, 0).to_dict()["mean"] == [0.0, 1.0]
