import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given
from hypothesis import strategies as st

from bird import MDCTDictionary, derive_stream
from bird._validation import ValidationError
from bird.dictionary import Atom
from bird.stopping import (
    NoiseProjectionModel,
    ThresholdSpec,
    calibrate_threshold_mc,
    erfcinv,
    erfinv,
    lambda_threshold,
    max_order_cdf,
    noise_max_coherence,
    normalized_coherence,
)
from oracles import erf_series, naive_basis


def test_coherence_self(small_dict):
    r = small_dict.synthesize_atom(Atom(0, 0, 5, 1))
    t = small_dict.analyze(r, small_dict.all_selections()[0])
    assert abs(normalized_coherence(t, np.linalg.norm(r)) - 1.0) <= 1e-10


def test_coherence_zero_table():
    assert normalized_coherence(np.zeros((1, 8)), 1.0) == 0.0


def test_coherence_toy_dictionary(rng):
    # four orthonormal atoms of a 64-sample basis
    B = naive_basis(64, 16, 0)[[3, 17, 40, 55]]
    r = rng.standard_normal(64)
    brute = max(abs(b @ r) for b in B) / np.linalg.norm(r)
    assert normalized_coherence(B @ r, np.linalg.norm(r)) == pytest.approx(brute, rel=1e-12)


@pytest.mark.parametrize("norm", [0.0, -1.0, 1e-13])
def test_coherence_degenerate(norm):
    with pytest.raises(ValidationError):
        normalized_coherence(np.ones(3), norm)


def test_erfinv_basic():
    assert erfinv(0.0) == 0.0
    assert abs(erfinv(erf_series(1.0)) - 1.0) <= 1e-10
    assert math.isfinite(erfinv(0.999999)) and erfinv(0.999999) > erfinv(0.9999)


def test_erfinv_against_series():
    for x in np.linspace(-0.999, 0.999, 41):
        assert abs(erf_series(erfinv(x)) - x) <= 1e-10


def test_erfinv_grid_round_trip():
    xs = np.linspace(-3, 3, 1000)
    err = max(abs(erfinv(math.erf(x)) - x) for x in xs if abs(math.erf(x)) < 1)
    assert err <= 1e-9


def test_erfinv_matches_scipy():
    for x in np.r_[np.linspace(-0.99, 0.99, 199), 1 - 1e-12, -1 + 1e-10]:
        assert erfinv(x) == pytest.approx(scipy.special.erfinv(x), rel=1e-13, abs=1e-15)
    for q in np.geomspace(1e-300, 1.9, 200):
        assert erfcinv(q) == pytest.approx(scipy.special.erfcinv(q), rel=1e-13)


@pytest.mark.parametrize("x", [1.0, -1.0, 1.5, float("nan")])
def test_erfinv_domain(x):
    with pytest.raises(ValidationError):
        erfinv(x)


@given(st.floats(-0.9999999, 0.9999999))
def test_erfinv_odd(x):
    assert erfinv(-x) == -erfinv(x)


def test_max_order_cdf_examples():
    one = NoiseProjectionModel(n=64, m=1)
    for z in (0.0, 0.05, 0.1, 0.3):
        assert max_order_cdf(one, z) == one.cdf(z)
    assert max_order_cdf(NoiseProjectionModel(64, 1000), 50.0) == 1.0
    median = one.sigma * math.sqrt(2) * erfinv(0.5)
    assert max_order_cdf(NoiseProjectionModel(64, 2), median) == pytest.approx(0.25, abs=1e-14)


@pytest.mark.parametrize("k", [1, 2, 7, 100])
def test_max_order_cdf_power(k):
    for z in np.linspace(0, 0.5, 11):
        base = max_order_cdf(NoiseProjectionModel(64, 1), z)
        assert max_order_cdf(NoiseProjectionModel(64, k), z) == base**k


def test_max_order_cdf_monotone_and_integral():
    model = NoiseProjectionModel(32, 50)
    zs = np.linspace(0, 1, 200)
    vals = [max_order_cdf(model, z) for z in zs]
    assert np.all(np.diff(vals) >= 0) and vals[0] == 0.0
    # derivative form: integrate M F^{M-1} f
    from scipy.integrate import quad

    z = 0.4
    integral, _ = quad(lambda t: model.m * model.cdf(t) ** (model.m - 1) * model.pdf(t), 0, z)
    assert integral == pytest.approx(max_order_cdf(model, z), abs=1e-9)


def test_quantile_is_inverse_of_max_cdf():
    n, m, p = 256, 4096, 0.01
    lam = lambda_threshold(n=n, m=m, p=p, variant="quantile")
    assert max_order_cdf(NoiseProjectionModel(n, m), lam) == pytest.approx(1 - p, rel=1e-10)


def test_quantile_example_value():
    lam = lambda_threshold(n=256, m=4096, p=0.01, variant="quantile")
    # reference: erf series inverted by bisection
    target = 0.99 ** (1 / 4096)
    lo, hi = 0.0, 6.0
    for _ in range(80):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if erf_series(mid, 60) < target else (lo, mid)
    assert lam == pytest.approx(math.sqrt(2 / 256) * lo, rel=1e-9)


def test_variant_ratios():
    n, m, p = 256, 4096, 1e-3
    q = lambda_threshold(n=n, m=m, p=p, variant="quantile")
    pr = lambda_threshold(n=n, m=m, p=p, variant="printed")
    co = lambda_threshold(n=n, m=m, p=p, variant="corrected")
    assert pr / q == pytest.approx(math.sqrt(1 - 2 / math.pi) / math.sqrt(n), rel=1e-14)
    assert co / q == pytest.approx(math.sqrt(1 - 2 / math.pi), rel=1e-14)


@pytest.mark.parametrize("variant", ["quantile", "printed", "corrected"])
def test_threshold_limits(variant):
    # p -> 1 drives erfinv's argument, hence the threshold, to zero
    assert lambda_threshold(n=64, m=1, p=1 - 1e-15, variant=variant) < 1e-13
    vals = [lambda_threshold(n=64, m=64, p=1 - 10.0**-k, variant=variant) for k in (2, 4, 8)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert lambda_threshold(ThresholdSpec(64, 64, 0.1, variant)) > 0


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5, 2.0])
def test_threshold_bad_p(p):
    with pytest.raises(ValidationError):
        lambda_threshold(n=64, m=64, p=p)


def test_threshold_bad_variant():
    with pytest.raises(ValidationError):
        lambda_threshold(n=64, m=64, p=0.1, variant="other")


def test_threshold_tiny_p_large_m_finite():
    lam = lambda_threshold(n=8192, m=393216, p=1e-12, variant="quantile")
    assert math.isfinite(lam) and 0 < lam < 1


def test_mc_single_basis_median():
    D = MDCTDictionary(scales=(32,), n=64, shift_granularity=1)
    mc = calibrate_threshold_mc(D, 0.5, 1000, derive_stream(0, 0))
    lam = lambda_threshold(n=64, m=D.n_atoms, p=0.5, variant="quantile")
    assert abs(lam - mc) <= 0.15 * mc


def test_mc_quantile_ordering():
    D = MDCTDictionary(scales=(16,), n=64, shift_granularity=1)
    hi = calibrate_threshold_mc(D, 0.1, 500, derive_stream(1, 0))
    lo = calibrate_threshold_mc(D, 0.9, 500, derive_stream(1, 0))
    assert lo < hi


def test_mc_infeasible():
    D = MDCTDictionary(scales=(16,), n=64, shift_granularity=1)
    with pytest.raises(ValidationError):
        calibrate_threshold_mc(D, 0.001, 10, derive_stream(0, 0))
    with pytest.raises(ValidationError):
        calibrate_threshold_mc(D, 0.001, 500, derive_stream(0, 0))


def test_noise_max_coherence_matches_bruteforce(small_dict, rng):
    w = small_dict.pad(rng.standard_normal((3, small_dict.n)))
    full = np.abs(small_dict.analyze_all(w)).max(axis=1) / np.linalg.norm(w, axis=1)
    np.testing.assert_allclose(noise_max_coherence(small_dict, w), full, rtol=1e-14)
