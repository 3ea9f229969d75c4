"""Synthetic signals, noise, metrics and benchmark sweeps."""

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from ._random import derive_stream
from ._validation import ValidationError, check_multichannel, check_positive_int

NMSE_FLOOR_DB = -300.0

# Donoho-Johnstone Blocks
BLOCKS_KNOTS = (0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81)
BLOCKS_HEIGHTS = (4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2)

# stable AR(5) with a low-pass (pink-like) spectrum
DEFAULT_AR_COEFFS = (0.6, 0.15, 0.08, 0.05, 0.03)


def _unit(x):
    return x / np.linalg.norm(x)


def gen_doppler(n):
    """Doppler test signal on ``t = (i + 1) / n``, unit l2 norm."""
    n = check_positive_int(n, "n", minimum=16)
    t = np.arange(1, n + 1) / n
    return _unit(np.sqrt(t * (1.0 - t)) * np.sin(2.0 * np.pi * 1.05 / (t + 0.05)))


def gen_blocks(n):
    """Piecewise-constant Blocks signal on ``t = i / n``, unit l2 norm."""
    n = check_positive_int(n, "n", minimum=16)
    t = np.arange(n) / n
    x = np.zeros(n)
    for knot, height in zip(BLOCKS_KNOTS, BLOCKS_HEIGHTS):
        x += height * (t >= knot)
    return _unit(x)


def gen_sparse(dictionary, n_atoms, rng, n_channels=1, scales=None):
    """Random combination of ``n_atoms`` dictionary atoms.

    With ``n_channels > 1`` every channel shares the support and gets its own
    Gaussian gains. Returns ``(signal, atom_ids)``; the signal has shape
    ``(n_channels, n)`` and unit Frobenius norm.
    """
    from .dictionary import Atom

    allowed = range(len(dictionary.scales)) if scales is None else [
        dictionary.scales.index(L) for L in scales
    ]
    allowed = list(allowed)
    ids = []
    waves = []
    while len(ids) < n_atoms:
        s = allowed[int(rng.integers(len(allowed)))]
        h = dictionary.hops[s]
        L = dictionary.scales[s]
        i = int(rng.integers(dictionary.shift_granularity))
        # keep atoms inside the unpadded signal and away from the wrap
        start_max = (dictionary.n - L - dictionary.shift_offsets[s][i]) // h
        if start_max < 0:
            continue
        atom = Atom(s, i, int(rng.integers(start_max + 1)), int(rng.integers(max(1, h // 4))))
        if atom.id in ids:
            continue
        ids.append(atom.id)
        waves.append(dictionary.crop(dictionary.synthesize_atom(atom)))
    waves = np.array(waves)
    gains = rng.standard_normal((n_channels, n_atoms))
    gains += np.sign(gains) * 0.5
    X = gains @ waves
    return X / np.linalg.norm(X), ids


def gen_evoked(dictionary, n_channels, rng, n_atoms=5):
    """Multichannel shared-support signal with per-channel Gaussian gains."""
    X, _ = gen_sparse(dictionary, n_atoms, rng, n_channels=n_channels)
    return X


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "white"
    ar_coeffs: tuple = field(default=DEFAULT_AR_COEFFS)

    def __post_init__(self):
        if self.kind not in ("white", "ar"):
            raise ValidationError(f"noise kind must be 'white' or 'ar', got {self.kind!r}")
        if self.kind == "ar":
            coeffs = tuple(float(a) for a in self.ar_coeffs)
            if not coeffs:
                raise ValidationError("AR noise needs at least one coefficient")
            object.__setattr__(self, "ar_coeffs", coeffs)
            if not is_stationary(coeffs):
                raise ValidationError(f"AR coefficients {coeffs} are not stationary")


def is_stationary(ar_coeffs):
    """True when every root of ``1 - sum_k a_k z^k`` lies outside the unit circle."""
    poly = np.r_[1.0, -np.asarray(ar_coeffs, dtype=float)]
    if np.all(poly[1:] == 0):
        return True
    # roots of z^p - a_1 z^{p-1} - ... - a_p are the inverses of those above
    return bool(np.all(np.abs(np.roots(poly)) < 1.0))


def gen_noise(spec, n, c, rng):
    """Noise of shape ``(c, n)``; channels are independent."""
    if spec.kind == "white":
        return rng.standard_normal((c, n))
    order = len(spec.ar_coeffs)
    burn = 4 * order
    e = rng.standard_normal((c, n + burn))
    x = lfilter([1.0], np.r_[1.0, -np.asarray(spec.ar_coeffs)], e, axis=1)
    return x[:, burn:]


def mix_at_snr(clean, noise, snr_db):
    """``clean + beta * noise`` with total-energy SNR equal to ``snr_db``."""
    clean = np.asarray(clean, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if clean.shape != noise.shape:
        raise ValidationError(f"shape mismatch: {clean.shape} vs {noise.shape}")
    ec = float(np.sum(clean**2))
    en = float(np.sum(noise**2))
    if ec == 0.0 or en == 0.0:
        raise ValidationError("clean and noise must both have nonzero energy")
    beta = math.sqrt(ec / (en * 10.0 ** (snr_db / 10.0)))
    return clean + beta * noise


def _ratio_db(err, ref):
    err = np.asarray(err, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    den = float(np.sum(ref**2))
    if den == 0.0:
        raise ValidationError("reference has zero energy")
    num = float(np.sum(err**2))
    if num == 0.0:
        return NMSE_FLOOR_DB
    return max(NMSE_FLOOR_DB, 10.0 * math.log10(num / den))


def nmse(estimate, reference):
    """``10 log10(||X - Y_hat||_F^2 / ||X||_F^2)`` in dB, floored at -300 dB."""
    estimate = np.asarray(estimate, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if estimate.shape != reference.shape:
        raise ValidationError(f"shape mismatch: {estimate.shape} vs {reference.shape}")
    return _ratio_db(reference - estimate, reference)


def ansr(estimate, y_test):
    """Averaged noise-to-signal ratio of an estimate against held-out trials, in dB."""
    estimate = np.asarray(estimate, dtype=np.float64)
    y_test = np.asarray(y_test, dtype=np.float64)
    if estimate.shape != y_test.shape:
        raise ValidationError(f"shape mismatch: {estimate.shape} vs {y_test.shape}")
    return _ratio_db(y_test - estimate, y_test)


@dataclass
class TrialSet:
    trials: np.ndarray  # (T, C, N)
    n_learn: int
    n_test: int

    def __post_init__(self):
        self.trials = np.asarray(self.trials, dtype=np.float64)
        if self.trials.ndim == 2:
            self.trials = self.trials[:, np.newaxis, :]
        if self.trials.ndim != 3:
            raise ValidationError("trials must have shape (T, C, N)")
        if self.n_learn < 1 or self.n_test < 1:
            raise ValidationError("both splits must be non-empty")
        if self.n_learn + self.n_test > self.trials.shape[0]:
            raise ValidationError("n_learn + n_test exceeds the number of trials")

    @property
    def y_learn(self):
        return self.trials[: self.n_learn].mean(axis=0)

    @property
    def y_test(self):
        return self.trials[self.n_learn : self.n_learn + self.n_test].mean(axis=0)


def trial_split_eval(trials, denoiser):
    """ANSR of ``denoiser(Y_learn)`` against ``Y_test``."""
    return ansr(denoiser(trials.y_learn), trials.y_test)


# -- benchmark sweeps ------------------------------------------------------

BENCH_COLUMNS = ("method", "signal", "snr_db", "seed", "J", "p", "l", "nmse_db",
                 "iterations_mean", "wall_time_ms")
METHODS = ("bird", "sbird", "bird-per-channel", "smp-oracle", "rssmp-oracle")
SIGNALS = ("doppler", "blocks", "evoked")

_BENCH_DEFAULTS = {
    "methods": ["bird"],
    "signals": ["doppler"],
    "snr_db": [5.0],
    "seeds": [0],
    "n": 1024,
    "channels": 1,
    "runs": 30,
    "p": 1e-6,
    "l": 1.0,
    "variant": "corrected",
    "noise": "white",
    "ar_coeffs": list(DEFAULT_AR_COEFFS),
    "scales": None,
    "shift_granularity": 64,
    "trials": 1,
    "max_iterations": None,
    "oracle_max_iterations": None,
}


def resolve_bench_config(config):
    unknown = set(config) - set(_BENCH_DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown benchmark config keys: {sorted(unknown)}")
    cfg = dict(_BENCH_DEFAULTS, **config)
    for m in cfg["methods"]:
        if m not in METHODS:
            raise ValidationError(f"unknown method {m!r}; expected one of {METHODS}")
    for s in cfg["signals"]:
        if s not in SIGNALS:
            raise ValidationError(f"unknown signal {s!r}; expected one of {SIGNALS}")
    if isinstance(cfg["seeds"], int):
        cfg["seeds"] = list(range(cfg["seeds"]))
    cfg["snr_db"] = [float(s) for s in cfg["snr_db"]]
    return cfg


def make_clean(signal, dictionary, channels, rng):
    if signal == "doppler":
        x = gen_doppler(dictionary.n)
    elif signal == "blocks":
        x = gen_blocks(dictionary.n)
    elif signal == "evoked":
        return gen_evoked(dictionary, channels, rng)
    else:
        raise ValidationError(f"unknown signal {signal!r}")
    X = np.tile(x, (channels, 1))
    return X / np.linalg.norm(X)


def run_method(method, Y, dictionary, cfg, seed, clean=None, n_jobs=1):
    """Denoise ``Y`` (shape ``(C, n)``) with a named method; returns a DenoisedResult."""
    from .baselines import rssmp_oracle, smp
    from .pursuit import bird, bird_multichannel
    from .structured import sbird

    J, p, variant = cfg["runs"], cfg["p"], cfg["variant"]
    max_it = cfg["max_iterations"]
    if method == "bird":
        if Y.shape[0] == 1:
            res = bird(Y[0], dictionary, J, p, seed, variant, max_it, n_jobs=n_jobs)
            res.estimate = res.estimate[np.newaxis]
            return res
        return bird_multichannel(Y, dictionary, J, p, seed, variant, max_it, n_jobs=n_jobs)
    if method == "bird-per-channel":
        return bird_multichannel(Y, dictionary, J, p, seed, variant, max_it, n_jobs=n_jobs)
    if method == "sbird":
        return sbird(Y, dictionary, J, p, cfg["l"], seed, variant, max_it, n_jobs=n_jobs)
    if clean is None:
        raise ValidationError(f"{method} needs the clean reference")
    outs = []
    for c in range(Y.shape[0]):
        if method == "smp-oracle":
            eps = float(np.linalg.norm(Y[c] - clean[c]))
            res = smp(Y[c], dictionary, J, seed, target_residual=eps,
                      max_iterations=max_it, n_jobs=n_jobs, stream_prefix=(c,) if Y.shape[0] > 1 else ())
        elif method == "rssmp-oracle":
            _, res = rssmp_oracle(Y[c], clean[c], dictionary, J, cfg["oracle_max_iterations"], seed,
                                  n_jobs=n_jobs, stream_prefix=(c,) if Y.shape[0] > 1 else ())
        else:
            raise ValidationError(f"unknown method {method!r}")
        outs.append(res)
    res = outs[0]
    if len(outs) > 1:
        runs = [r for o in outs for r in o.runs]
        res = type(res)(np.stack([o.estimate for o in outs]), runs, res.threshold, res.config, res.info)
    else:
        res.estimate = res.estimate[np.newaxis]
    return res


def run_benchmark(config, n_jobs=1, timing=False):
    """Evaluate every (method, signal, snr, seed) cell; returns rows as dicts.

    Each cell averages NMSE over ``config["trials"]`` noise realizations.
    ``wall_time_ms`` is only measured with ``timing=True`` (otherwise empty)
    so that reports are reproducible byte for byte.
    """
    from .dictionary import MDCTDictionary, default_scales

    cfg = resolve_bench_config(config)
    scales = default_scales(cfg["n"], cfg["scales"])
    dictionary = MDCTDictionary(scales, cfg["n"], cfg["shift_granularity"])
    noise_spec = NoiseSpec(cfg["noise"], tuple(cfg["ar_coeffs"]))
    C = int(cfg["channels"])
    rows = []
    for method in cfg["methods"]:
        for signal in cfg["signals"]:
            for snr in cfg["snr_db"]:
                for seed in cfg["seeds"]:
                    scores, iters = [], []
                    elapsed = 0.0
                    for trial in range(int(cfg["trials"])):
                        # data depend on (seed, trial) only, so every method sees the same input
                        rng = derive_stream(seed, (1_000_003, trial))
                        clean = make_clean(signal, dictionary, C, rng)
                        Y = mix_at_snr(clean, gen_noise(noise_spec, dictionary.n, C, rng), snr)
                        t0 = time.perf_counter()
                        res = run_method(method, Y, dictionary, cfg, seed, clean=clean, n_jobs=n_jobs)
                        elapsed += time.perf_counter() - t0
                        scores.append(nmse(res.estimate, clean))
                        iters.append(float(np.mean(res.iterations)))
                    rows.append({
                        "method": method,
                        "signal": signal,
                        "snr_db": snr,
                        "seed": seed,
                        "J": cfg["runs"],
                        "p": cfg["p"],
                        "l": cfg["l"],
                        "nmse_db": float(np.mean(scores)),
                        "iterations_mean": float(np.mean(iters)),
                        "wall_time_ms": 1000.0 * elapsed / len(scores) if timing else "",
                    })
    return rows


def write_bench_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def load_bench_config(path):
    with open(path) as fh:
        return json.load(fh)
