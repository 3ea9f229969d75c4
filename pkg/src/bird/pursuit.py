"""Randomized matching pursuit with blind stopping, and its ensemble average."""

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ._random import derive_stream
from ._validation import ValidationError, check_positive_int, check_probability, check_signal
from .stopping import DEFAULT_VARIANT, lambda_threshold

RESIDUAL_FLOOR = 1e-12


@dataclass
class PursuitConfig:
    threshold: float
    max_iterations: int
    residual_floor: float = RESIDUAL_FLOOR

    def __post_init__(self):
        if not self.threshold >= 0:
            raise ValidationError(f"threshold must be >= 0, got {self.threshold!r}")
        check_positive_int(self.max_iterations, "max_iterations")


@dataclass
class SparseApprox:
    """Outcome of one pursuit.

    ``estimate`` lives on the dictionary's padded domain. ``residual_norms``
    holds ``||r^0||, ..., ||r^n||`` and ``coherences`` the normalized
    correlation of each selected atom.
    """

    atom_ids: list = field(default_factory=list)
    coefs: list = field(default_factory=list)
    estimate: np.ndarray = None
    residual_norms: list = field(default_factory=list)
    coherences: list = field(default_factory=list)
    selections: list = field(default_factory=list)
    channel: int = None

    @property
    def iterations(self):
        return len(self.atom_ids)

    @property
    def sparsity(self):
        return len(set(self.atom_ids))

    @property
    def final_residual_norm(self):
        return self.residual_norms[-1] if self.residual_norms else 0.0

    def to_dict(self):
        out = {
            "iterations": self.iterations,
            "atom_ids": [int(a) for a in self.atom_ids],
            "coeffs": [float(c) for c in self.coefs],
            "final_residual_norm": float(self.final_residual_norm),
        }
        if self.channel is not None:
            out["channel"] = int(self.channel)
        return out


def _norm(x):
    return float(np.sqrt(np.dot(x, x)))


def greedy_pursuit(y, dictionary, cfg, draw, target_residual=None):
    """Matching pursuit where ``draw()`` supplies the subdictionary of each iteration.

    Stops when the normalized coherence over the drawn atoms is ``<=``
    ``cfg.threshold`` (the candidate is discarded), when the residual norm
    falls to ``cfg.residual_floor * ||y||`` or to ``target_residual``, or
    after ``cfg.max_iterations`` selections.
    """
    r = dictionary.pad(y)
    approx = SparseApprox(estimate=np.zeros_like(r))
    rn = _norm(r)
    floor = cfg.residual_floor * rn
    approx.residual_norms.append(rn)
    while approx.iterations < cfg.max_iterations:
        if rn == 0.0 or rn <= floor:
            break
        if target_residual is not None and rn <= target_residual:
            break
        sel = draw()
        table = dictionary.analyze(r[np.newaxis, :], sel)
        column, coef = table.argmax()
        lam = abs(coef) / rn
        if lam <= cfg.threshold:
            break
        atom = table.atom_at(column)
        dictionary.add_atom(approx.estimate, atom, coef)
        dictionary.add_atom(r, atom, -coef)
        rn = _norm(r)
        approx.atom_ids.append(atom.id)
        approx.coefs.append(coef)
        approx.coherences.append(lam)
        approx.residual_norms.append(rn)
        approx.selections.append(sel)
    return approx


def run_single_pursuit(y, dictionary, cfg, rng):
    """One pursuit drawing a fresh random subdictionary at every iteration."""
    y = check_signal(y)
    return greedy_pursuit(y, dictionary, cfg, lambda: dictionary.draw_subdictionary(rng))


def default_max_iterations(dictionary):
    return max(1, dictionary.n // 4)


@dataclass
class DenoisedResult:
    """Averaged estimate plus per-run diagnostics.

    ``estimate`` is cropped to the original length: shape ``(n,)`` for mono
    signals, ``(n_channels, n)`` for multichannel ones.
    """

    estimate: np.ndarray
    runs: list
    threshold: float
    config: dict
    info: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return [run.iterations for run in self.runs]

    def to_dict(self, reference=None):
        from .bench import nmse

        report = {
            "method": self.config.get("method", "bird"),
            "seed": self.config.get("seed"),
            "J": self.config.get("J"),
            "p": self.config.get("p"),
            "variant": self.config.get("variant"),
            "threshold": float(self.threshold),
            "config": self.config,
            "per_run": [run.to_dict() for run in self.runs],
            "nmse_if_reference_given": None,
        }
        if reference is not None:
            report["nmse_if_reference_given"] = float(nmse(self.estimate, reference))
        report.update({k: v for k, v in self.info.items() if k not in report})
        return report


def average_estimates(estimates):
    """Mean of equally shaped arrays, summed in list order."""
    total = np.zeros_like(estimates[0])
    for e in estimates:
        total = total + e
    return total / len(estimates)


def run_parallel(fn, args_list, n_jobs=1):
    """Apply ``fn`` to each argument tuple, returning results in input order."""
    if n_jobs is None or n_jobs == 1 or len(args_list) <= 1:
        return [fn(*args) for args in args_list]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(*args) for args in args_list)


def bird(y, dictionary, runs=30, p=1e-6, master_seed=0, variant=DEFAULT_VARIANT,
         max_iterations=None, threshold=None, n_jobs=1, stream_prefix=()):
    """Blind random pursuit denoising of a 1-D signal.

    Runs ``runs`` independent pursuits on streams ``derive_stream(master_seed,
    (*stream_prefix, j))`` and averages their estimates. ``threshold``
    overrides the value derived from ``p``.
    """
    y = check_signal(y)
    runs = check_positive_int(runs, "runs")
    p = check_probability(p)
    if threshold is None:
        threshold = lambda_threshold(n=dictionary.n, m=dictionary.n_atoms, p=p, variant=variant)
    if max_iterations is None:
        max_iterations = default_max_iterations(dictionary)
    cfg = PursuitConfig(threshold=threshold, max_iterations=max_iterations)
    streams = [derive_stream(master_seed, (*stream_prefix, j)) for j in range(runs)]
    approxes = run_parallel(run_single_pursuit, [(y, dictionary, cfg, s) for s in streams], n_jobs)
    estimate = dictionary.crop(average_estimates([a.estimate for a in approxes]))
    config = {
        "method": "bird",
        "seed": int(master_seed),
        "J": runs,
        "p": p,
        "variant": variant,
        "max_iterations": int(max_iterations),
        "dictionary": dictionary.get_spec(),
    }
    return DenoisedResult(estimate, approxes, threshold, config)


def bird_multichannel(Y, dictionary, runs=30, p=1e-6, master_seed=0, variant=DEFAULT_VARIANT,
                      max_iterations=None, n_jobs=1):
    """BIRD applied to each channel independently (no shared structure).

    Channel ``c`` uses streams keyed ``(c, j)``; a single channel falls back to
    plain :func:`bird` streams.
    """
    from ._validation import check_multichannel

    Y = check_multichannel(Y)
    if Y.shape[0] == 1:
        res = bird(Y[0], dictionary, runs, p, master_seed, variant, max_iterations, n_jobs=n_jobs)
        res.estimate = res.estimate[np.newaxis, :]
        for run in res.runs:
            run.channel = 0
        return res
    per_channel = [
        bird(Y[c], dictionary, runs, p, master_seed, variant, max_iterations,
             n_jobs=n_jobs, stream_prefix=(c,))
        for c in range(Y.shape[0])
    ]
    first = per_channel[0]
    all_runs = []
    for c, res in enumerate(per_channel):
        for run in res.runs:
            run.channel = c
            all_runs.append(run)
    config = dict(first.config, method="bird-per-channel", channels=Y.shape[0])
    estimate = np.stack([res.estimate for res in per_channel])
    return DenoisedResult(estimate, all_runs, first.threshold, config)
