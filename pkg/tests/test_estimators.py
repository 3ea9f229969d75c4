import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from bird import BIRD, SBIRD, MDCTDictionary, bird, sbird
from bird.bench import gen_doppler
from bird.estimators import default_scales


@pytest.fixture
def X(rng):
    return np.stack([gen_doppler(256), -gen_doppler(256)]) + 0.05 * rng.standard_normal((2, 256))


def test_params_round_trip():
    est = BIRD(n_runs=5, p=1e-3, random_state=3)
    params = est.get_params()
    assert params["n_runs"] == 5 and params["p"] == 1e-3 and params["variant"] == "corrected"
    other = clone(est)
    assert other.get_params() == params
    other.set_params(n_runs=7)
    assert other.n_runs == 7 and est.n_runs == 5
    assert "l" in SBIRD().get_params()


def test_fit_transform_matches_functional(X):
    est = BIRD(n_runs=4, random_state=2).fit(X)
    D = MDCTDictionary(default_scales(256), 256)
    assert est.dictionary_.n_atoms == D.n_atoms
    assert est.n_features_in_ == 256
    out = est.transform(X)
    assert out.shape == X.shape
    for row, x in zip(out, X):
        np.testing.assert_array_equal(row, bird(x, D, 4, master_seed=2).estimate)
    assert est.denoise(X[0]).threshold == est.threshold_


def test_sbird_estimator(X):
    est = SBIRD(n_runs=3, l=0.5, random_state=1)
    out = est.fit_transform(X)
    ref = sbird(X, MDCTDictionary(default_scales(256), 256), 3, l=0.5, master_seed=1).estimate
    np.testing.assert_array_equal(out, ref)


def test_not_fitted_and_mismatch(X):
    with pytest.raises(NotFittedError):
        BIRD().transform(X)
    est = BIRD(n_runs=1).fit(X)
    with pytest.raises(ValueError):
        est.transform(X[:, :128])


def test_rejects_nan(X):
    X = X.copy()
    X[0, 3] = np.nan
    with pytest.raises(ValueError):
        BIRD().fit(X)


def test_random_state_types(X):
    a = BIRD(n_runs=2, random_state=np.random.RandomState(0)).fit(X).transform(X)
    b = BIRD(n_runs=2, random_state=np.random.RandomState(0)).fit(X).transform(X)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        BIRD(random_state="x").fit(X).transform(X)


def test_pipeline(X):
    pipe = make_pipeline(FunctionTransformer(lambda Z: 2 * Z), BIRD(n_runs=2))
    assert pipe.fit_transform(X).shape == X.shape


def test_short_signal():
    with pytest.raises(ValueError):
        BIRD().fit(np.zeros((1, 16)))
