"""scikit-learn compatible wrappers around :func:`bird.pursuit.bird` and
:func:`bird.structured.sbird`.

``BIRD`` treats each row of ``X`` as an independent signal. ``SBIRD`` treats
the whole ``X`` of shape ``(n_channels, n_times)`` as one multichannel
recording. ``fit`` only inspects the signal length: it builds the dictionary
and the blind threshold, neither of which depends on the data values.
"""

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dictionary import DEFAULT_SHIFT_GRANULARITY, MDCTDictionary, default_scales
from .pursuit import bird
from .stopping import DEFAULT_VARIANT, lambda_threshold
from .structured import sbird


def _master_seed(random_state):
    if random_state is None:
        return 0
    if isinstance(random_state, numbers.Integral):
        return int(random_state)
    if isinstance(random_state, np.random.RandomState):
        return int(random_state.randint(0, 2**31 - 1))
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(0, 2**63 - 1))
    raise ValueError(f"random_state must be None, an int or a numpy random generator, got {random_state!r}")


class _BaseBird(TransformerMixin, BaseEstimator):
    def _fit_dictionary(self, n_times):
        self.dictionary_ = MDCTDictionary(
            default_scales(n_times, self.scales), n_times, self.shift_granularity
        )
        self.threshold_ = lambda_threshold(
            n=n_times, m=self.dictionary_.n_atoms, p=self.p, variant=self.variant
        )
        self.n_features_in_ = n_times

    def _check_X(self, X, reset):
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        if reset:
            self._fit_dictionary(X.shape[1])
        else:
            check_is_fitted(self, "dictionary_")
            if X.shape[1] != self.n_features_in_:
                raise ValueError(
                    f"X has {X.shape[1]} samples per signal, but {type(self).__name__} "
                    f"was fitted for {self.n_features_in_}"
                )
        return X

    def fit(self, X, y=None):
        self._check_X(X, reset=True)
        return self


class BIRD(_BaseBird):
    """Blind random pursuit denoiser for single-channel signals.

    Parameters
    ----------
    n_runs : int, default=30
        Number of randomized pursuits averaged together.
    p : float, default=1e-6
        Probability that pure noise would pass the stopping test.
    variant : {"corrected", "quantile", "printed"}
        Threshold formula, see :func:`bird.stopping.lambda_threshold`.
    scales : sequence of int or None
        MDCT window lengths; ``None`` keeps the default scales that fit.
    shift_granularity : int, default=64
    max_iter : int or None
        Per-run iteration cap, ``n_times // 4`` when ``None``.
    random_state : int, RandomState, Generator or None
    n_jobs : int, default=1

    Attributes
    ----------
    dictionary_ : MDCTDictionary
    threshold_ : float
    n_features_in_ : int
    """

    def __init__(self, n_runs=30, p=1e-6, variant=DEFAULT_VARIANT, scales=None,
                 shift_granularity=DEFAULT_SHIFT_GRANULARITY, max_iter=None,
                 random_state=0, n_jobs=1):
        self.n_runs = n_runs
        self.p = p
        self.variant = variant
        self.scales = scales
        self.shift_granularity = shift_granularity
        self.max_iter = max_iter
        self.random_state = random_state
        self.n_jobs = n_jobs

    def denoise(self, x):
        """Full :class:`~bird.pursuit.DenoisedResult` for one 1-D signal."""
        X = self._check_X(np.atleast_2d(x), reset=False)
        return bird(X[0], self.dictionary_, self.n_runs, self.p, _master_seed(self.random_state),
                    self.variant, self.max_iter, threshold=self.threshold_, n_jobs=self.n_jobs)

    def transform(self, X):
        X = self._check_X(X, reset=False)
        seed = _master_seed(self.random_state)
        return np.stack([
            bird(x, self.dictionary_, self.n_runs, self.p, seed, self.variant, self.max_iter,
                 threshold=self.threshold_, n_jobs=self.n_jobs).estimate
            for x in X
        ])


class SBIRD(_BaseBird):
    """Structured blind random pursuit denoiser for one multichannel recording.

    ``X`` has shape ``(n_channels, n_times)``. Parameters match :class:`BIRD`
    plus ``l``, the fraction of channels assumed to carry each atom.
    """

    def __init__(self, n_runs=30, p=1e-6, l=1.0, variant=DEFAULT_VARIANT, scales=None,
                 shift_granularity=DEFAULT_SHIFT_GRANULARITY, max_iter=None,
                 random_state=0, n_jobs=1):
        self.n_runs = n_runs
        self.p = p
        self.l = l
        self.variant = variant
        self.scales = scales
        self.shift_granularity = shift_granularity
        self.max_iter = max_iter
        self.random_state = random_state
        self.n_jobs = n_jobs

    def denoise(self, X):
        X = self._check_X(X, reset=False)
        return sbird(X, self.dictionary_, self.n_runs, self.p, self.l,
                     _master_seed(self.random_state), self.variant, self.max_iter,
                     threshold=self.threshold_, n_jobs=self.n_jobs)

    def transform(self, X):
        return self.denoise(X).estimate
