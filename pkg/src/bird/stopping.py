"""Blind stopping rule: normalized coherence and the noise-only threshold.

For white Gaussian noise ``w`` of length ``N``, each normalized projection
``|<w, phi>| / ||w||`` is modeled as half-normal with variance ``1 / N`` and
the ``M`` projections as i.i.d. The largest one then has CDF ``F(z) ** M``,
and the threshold is its ``(1 - p)`` quantile: a pure-noise residual exceeds
it with probability ``p``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import ValidationError, check_positive_int, check_probability

VARIANTS = ("corrected", "quantile", "printed")
DEFAULT_VARIANT = "corrected"

_SQRT_PI = math.sqrt(math.pi)


def normalized_coherence(projections, residual_norm, floor=1e-12):
    """Largest ``|<r, phi>|`` over the given projections divided by ``||r||``."""
    if not residual_norm > floor:
        raise ValidationError(f"residual norm {residual_norm!r} is degenerate (<= {floor})")
    values = getattr(projections, "values", projections)
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values))) / float(residual_norm)


def _initial_erfinv(x):
    # Giles (2010) single-precision approximation, refined below
    w = -math.log((1.0 - x) * (1.0 + x))
    if w < 5.0:
        w -= 2.5
        p = 2.81022636e-08
        for c in (3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
                  -0.00125372503, -0.00417768164, 0.246640727, 1.50140941):
            p = c + p * w
    else:
        w = math.sqrt(w) - 3.0
        p = -0.000200214257
        for c in (0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
                  -0.0076224613, 0.00943887047, 1.00167406, 2.83297682):
            p = c + p * w
    return p * x


def erfcinv(q):
    """Inverse complementary error function for ``q`` in ``(0, 2)``.

    Accurate for ``q`` close to zero, where ``erfinv(1 - q)`` would lose digits.
    """
    q = float(q)
    if not 0.0 < q < 2.0:
        raise ValidationError(f"erfcinv requires 0 < q < 2, got {q!r}")
    if q > 1.0:
        return -erfcinv(2.0 - q)
    if q > 0.5:
        x = _initial_erfinv(1.0 - q)
    else:
        # asymptotic start from erfc(x) ~ exp(-x^2) / (x sqrt(pi))
        t = math.sqrt(-math.log(q))
        x = t - math.log(t * _SQRT_PI) / (2.0 * t) if t > 1.0 else _initial_erfinv(1.0 - q)
    for _ in range(50):
        # Halley step on erfc(x) - q, with relative residual for small q
        err = math.erfc(x) - q
        deriv = -2.0 / _SQRT_PI * math.exp(-x * x)
        step = err / deriv
        step = step / (1.0 + x * step)
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return x


def erfinv(x):
    """Inverse error function on ``(-1, 1)``; odd, with ``erf(erfinv(x)) == x``."""
    x = float(x)
    if not -1.0 < x < 1.0:
        raise ValidationError(f"erfinv requires |x| < 1, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < 0.0:
        return -erfinv(-x)
    if x > 0.5:
        return erfcinv(1.0 - x)
    y = _initial_erfinv(x)
    for _ in range(50):
        err = math.erf(y) - x
        deriv = 2.0 / _SQRT_PI * math.exp(-y * y)
        step = err / deriv
        step = step / (1.0 + y * step)
        y -= step
        if abs(step) <= 1e-16 * max(1.0, abs(y)):
            break
    return y


@dataclass(frozen=True)
class NoiseProjectionModel:
    """Half-normal projections with variance ``1 / n``, maximum over ``m`` of them."""

    n: int
    m: int

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.m, "m")

    @property
    def sigma(self):
        return 1.0 / math.sqrt(self.n)

    def cdf(self, z):
        if z <= 0:
            return 0.0
        return math.erf(z / (self.sigma * math.sqrt(2.0)))

    def pdf(self, z):
        if z < 0:
            return 0.0
        s = self.sigma
        return math.sqrt(2.0 / math.pi) / s * math.exp(-0.5 * (z / s) ** 2)


def max_order_cdf(model, z):
    """CDF of the largest of ``model.m`` i.i.d. projections, ``F(z) ** m``."""
    if z < 0:
        raise ValidationError(f"z must be non-negative, got {z!r}")
    return model.cdf(z) ** model.m


@dataclass(frozen=True)
class ThresholdSpec:
    n: int
    m: int
    p: float
    variant: str = DEFAULT_VARIANT

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.m, "m")
        check_probability(self.p, "p")
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


def lambda_threshold(spec=None, *, n=None, m=None, p=None, variant=DEFAULT_VARIANT):
    """Coherence threshold below which a residual is treated as noise.

    ``variant="quantile"`` gives ``sqrt(2 / n) * erfinv((1 - p) ** (1 / m))``,
    the ``(1 - p)`` quantile of :func:`max_order_cdf`; ``"corrected"``
    multiplies it by ``sqrt(1 - 2 / pi)``; ``"printed"`` gives
    ``sqrt(2) / n * sqrt(1 - 2 / pi) * erfinv((1 - p) ** (1 / m))``.
    """
    if spec is None:
        spec = ThresholdSpec(n=n, m=m, p=p, variant=variant)
    # 1 - (1 - p) ** (1 / m), kept accurate when it is tiny
    tail = -math.expm1(math.log1p(-spec.p) / spec.m)
    if tail >= 1.0:
        return 0.0
    core = erfcinv(tail)
    if spec.variant == "quantile":
        return math.sqrt(2.0 / spec.n) * core
    if spec.variant == "corrected":
        return math.sqrt(2.0 * (1.0 - 2.0 / math.pi) / spec.n) * core
    return math.sqrt(2.0) / spec.n * math.sqrt(1.0 - 2.0 / math.pi) * core


def noise_max_coherence(dictionary, noise):
    """``max_m |<w, phi_m>| / ||w||`` over every atom, one value per row of ``noise``."""
    noise = np.atleast_2d(np.asarray(noise, dtype=np.float64))
    norms = np.sqrt(np.einsum("ij,ij->i", noise, noise))
    best = np.zeros(noise.shape[0])
    for s in range(len(dictionary.scales)):
        for i in range(dictionary.shift_granularity):
            c = dictionary.analyze_basis(noise, s, i)
            best = np.maximum(best, np.abs(c).reshape(noise.shape[0], -1).max(axis=1))
    return best / norms


def calibrate_threshold_mc(dictionary, p, trials, rng, batch=256):
    """Empirical ``(1 - p)`` quantile of the noise coherence over all atoms.

    White Gaussian signals of the dictionary's length ``n`` are drawn,
    zero-padded, and their maximal normalized projection over the full
    dictionary is recorded.
    """
    p = check_probability(p)
    trials = check_positive_int(trials, "trials", minimum=100)
    if trials * min(p, 1.0 - p) < 1.0:
        raise ValidationError(
            f"{trials} trials cannot resolve the {1 - p:g} quantile; need at least {math.ceil(1 / min(p, 1 - p))}"
        )
    stats = []
    done = 0
    while done < trials:
        k = min(batch, trials - done)
        w = dictionary.pad(rng.standard_normal((k, dictionary.n)))
        stats.append(noise_max_coherence(dictionary, w))
        done += k
    return float(np.quantile(np.concatenate(stats), 1.0 - p))
