import math

import numpy as np
import pytest
from scipy import integrate

from conftest import random_symmetric
from holocrit.gauss_mc import (
    METHODS,
    JetCovariance,
    b0_profile,
    beta2_profile,
    claim_g24_check,
    density_general,
    density_morse_general,
    density_profile,
    estimate_b0,
    estimate_b0q,
    estimate_beta2q,
    g24_exact,
    interval_integrals,
    iz_check,
    iz_exact,
    morse_leading_table,
)
from holocrit.linalg import CholeskyError


def _quad_strata(roots, extra):
    m = len(roots)
    edges = [0.0] + list(roots) + [np.inf]
    out = []
    for k in range(m + 1):
        f = lambda t: abs(np.prod([r - t for r in roots])) * t**extra * math.exp(-t)
        val, _ = integrate.quad(f, edges[k], edges[k + 1], epsabs=1e-13, epsrel=1e-11)
        out.append(val)
    return np.array(out)


@pytest.mark.parametrize("extra", [0, 1])
def test_interval_integrals_match_quadrature(extra):
    rng = np.random.default_rng(8)
    for m in (1, 2, 3, 4):
        for _ in range(5):
            roots = np.sort(rng.exponential(2.0, m))
            got = interval_integrals(roots[None, :], extra)[0]
            assert np.allclose(got, _quad_strata(roots, extra), rtol=1e-8, atol=1e-12)


def test_interval_integrals_m1_closed_form():
    # int_0^r (r - t) e^-t dt = r - 1 + e^-r ; int_r^inf (t - r) e^-t dt = e^-r
    r = 1.7
    got = interval_integrals(np.array([[r]]))[0]
    assert np.allclose(got, [r - 1 + math.exp(-r), math.exp(-r)])


def test_b0_m1_matches_value():
    est = estimate_b0(1, 400000, 1)
    assert est.zscore(5 / (3 * math.pi)) < 4


@pytest.mark.parametrize("m", [1, 2])
def test_conditional_and_sampled_estimators_agree(m):
    a = b0_profile(m, 300000, 2, conditional=True)
    b = b0_profile(m, 300000, 3, conditional=False)
    for q in range(m, 2 * m + 1):
        va, vb = a.values[q], b.values[q]
        assert abs(va.mean - vb.mean) < 4 * math.hypot(va.std_error, vb.std_error)


def test_profile_consistency():
    prof = b0_profile(2, 100000, 4)
    assert prof.total.mean == pytest.approx(sum(prof.means()), rel=1e-12)
    assert estimate_b0q(2, 3, 100000, 4).mean == prof.values[3].mean


def test_morse_leading_table_rows():
    prof = morse_leading_table(2, 200000, 5)
    ref = [1.5, 0.59259, 0.09259]
    for got, want in zip(prof.means(), ref):
        assert abs(got - want) / want < 0.03
    assert prof.signed.zscore(2 / math.pi**2) < 4


def test_morse_table_dimension_limit():
    with pytest.raises(ValueError):
        morse_leading_table(7, 10, 0)


@pytest.mark.parametrize("method", METHODS)
def test_beta2_m1_methods(method):
    est = estimate_beta2q(1, 2, method, 200000, 6)
    assert est.zscore(1 / (27 * math.pi)) < 4


def test_beta2_unknown_method():
    with pytest.raises(ValueError):
        beta2_profile(1, "nope", 10, 0)


def test_index_out_of_range():
    with pytest.raises(ValueError):
        estimate_b0q(2, 5, 10, 0)


def test_jet_covariance_validation():
    with pytest.raises(ValueError):
        JetCovariance(np.eye(2), np.eye(3))
    with pytest.raises(CholeskyError):
        JetCovariance.diagonal(1, 1.0, [1.0, -1.0])


def test_standard_covariance_reduces_to_b0_integrand():
    # A = I, Lambda = diag(2, ..., 2, 1) gives pi^-m E|det(2HH^*-|x|^2)| = b0(m)
    cov = JetCovariance.diagonal(2, 1.0, [2.0, 2.0, 2.0, 1.0])
    est = density_general(cov, 300000, 7)
    assert est.zscore(118 / (27 * math.pi**2)) < 4


def test_projective_density_closed_loop():
    cov = JetCovariance.projective(1, 3)
    prof = density_profile(cov, 300000, 8)
    assert prof.values[1].scaled(math.pi).zscore(16 / 7) < 4
    assert prof.values[2].scaled(math.pi).zscore(9 / 7) < 4
    assert density_morse_general(cov, 2, 300000, 8).mean == prof.values[2].mean


def test_same_seed_reproduces_exactly():
    cov = JetCovariance.projective(1, 10)
    a = density_general(cov, 20000, 9)
    b = density_general(cov, 20000, 9)
    assert a == b


def test_iz_exact_m1_and_symmetry():
    assert iz_exact([0.7], [1.3]) == pytest.approx(np.exp(1j * 0.91))
    a = iz_exact([0.5, -0.2], [1.0, 0.3])
    b = iz_exact([1.0, 0.3], [0.5, -0.2])
    assert a == pytest.approx(b)


def test_iz_exact_rejects_coincident():
    with pytest.raises(ValueError):
        iz_exact([1.0, 1.0], [0.2, 0.3])


def test_iz_check_small():
    res = iz_check(2, [1.3, -0.8], [1.1, -0.6], 200000, 10)
    assert res.rel_err < 0.02
    assert set(res.to_dict()) >= {"mean", "std_error", "exact", "rel_err"}


def test_g24_exact_identity(rng):
    h = np.diag([1.0, 0.0])
    second, fourth = g24_exact(h)
    # |U_11|^2 moments for m=2: E = 1/2 * 2/3 ... checked against closed form
    assert second == pytest.approx(2 * 1 / 6)
    assert fourth == pytest.approx((8 + 16) / 120)
    h = random_symmetric(rng, 3)
    c2, c4 = claim_g24_check(3, h, 200000, 11)
    assert c2.rel_err < 0.02 and c4.rel_err < 0.03


def test_g24_rejects_bad_input():
    with pytest.raises(ValueError):
        claim_g24_check(1, np.eye(1), 10, 0)
    with pytest.raises(ValueError):
        claim_g24_check(2, np.array([[0, 1], [2, 0]]), 10, 0)
