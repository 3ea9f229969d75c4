"""Structured multichannel pursuit (S-BIRD).

All channels share one subdictionary draw per iteration. An atom is scored by
the mean of its ``k = floor(l * C)`` largest squared projections across
channels; the winner is subtracted from those ``k`` channels only, each with
its own coefficient. The pursuit stops once the mean of the ``k`` largest
per-channel normalized coherences drops to the threshold.
"""

from dataclasses import dataclass, field

import numpy as np

from ._random import derive_stream
from ._validation import check_fraction, check_multichannel, check_positive_int, check_probability
from .pursuit import (
    DenoisedResult,
    PursuitConfig,
    average_estimates,
    default_max_iterations,
    run_parallel,
)
from .stopping import DEFAULT_VARIANT, lambda_threshold


@dataclass
class StructuredConfig(PursuitConfig):
    l: float = 1.0


@dataclass
class StructuredApprox:
    """Outcome of one structured pursuit.

    ``active_channels[n]`` is the channel set updated at iteration ``n`` and
    ``coefs[n]`` the matching coefficients. ``residual_norms`` has shape
    ``(iterations + 1, C)``.
    """

    atom_ids: list = field(default_factory=list)
    active_channels: list = field(default_factory=list)
    coefs: list = field(default_factory=list)
    estimate: np.ndarray = None
    residual_norms: list = field(default_factory=list)
    stop_stats: list = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.atom_ids)

    @property
    def final_residual_norms(self):
        return list(self.residual_norms[-1]) if self.residual_norms else []

    def channel_selections(self, c):
        """``(atom_id, coef)`` pairs applied to channel ``c``."""
        out = []
        for atom_id, chans, coefs in zip(self.atom_ids, self.active_channels, self.coefs):
            for ch, coef in zip(chans, coefs):
                if ch == c:
                    out.append((atom_id, coef))
        return out

    def to_dict(self):
        n_channels = len(self.final_residual_norms)
        return {
            "iterations": self.iterations,
            "atom_ids": [int(a) for a in self.atom_ids],
            "coeffs": [[float(c) for c in cs] for cs in self.coefs],
            "active_channels": [[int(c) for c in cs] for cs in self.active_channels],
            "final_residual_norm": float(np.sqrt(np.sum(np.square(self.final_residual_norms)))),
            "final_residual_norms": [float(v) for v in self.final_residual_norms],
            "per_channel": [
                {"channel": c,
                 "atom_ids": [int(a) for a, _ in self.channel_selections(c)],
                 "coeffs": [float(v) for _, v in self.channel_selections(c)]}
                for c in range(n_channels)
            ],
        }


def top_k_mean(values, k, axis=0):
    """Mean of the ``k`` largest entries along ``axis``."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[axis]
    if k == n:
        return values.sum(axis=axis) / k
    top = -np.partition(-values, k - 1, axis=axis)
    return np.take(top, np.arange(k), axis=axis).sum(axis=axis) / k


def select_structured(projections, l):
    """Pick the atom maximizing the top-``floor(lC)`` mean of squared projections.

    ``projections`` is a ProjectionTable or a ``(C, n_atoms)`` array. Returns
    ``(column, channels)`` with ``channels`` the sorted indices of the
    ``floor(lC)`` channels with the largest squared projections on that atom.
    Ties go to the lowest column (atom id) and the lowest channel index.
    """
    values = np.asarray(getattr(projections, "values", projections), dtype=np.float64)
    C = values.shape[0]
    k = check_fraction(l, C)
    power = values * values
    scores = top_k_mean(power, k, axis=0)
    column = int(np.argmax(scores))
    order = np.argsort(-power[:, column], kind="stable")
    return column, tuple(sorted(int(c) for c in order[:k]))


def structured_stop_stat(coherences, l):
    """Mean of the ``floor(lC)`` largest per-channel normalized coherences."""
    coherences = np.asarray(coherences, dtype=np.float64)
    k = check_fraction(l, coherences.size)
    return float(np.sort(coherences)[::-1][:k].sum() / k)


def run_single_structured_pursuit(Y, dictionary, cfg, rng):
    Y = check_multichannel(Y)
    C = Y.shape[0]
    k = check_fraction(cfg.l, C)
    R = dictionary.pad(Y)
    approx = StructuredApprox(estimate=np.zeros_like(R))
    norms = np.array([np.sqrt(np.dot(r, r)) for r in R])
    floors = cfg.residual_floor * norms
    approx.residual_norms.append(norms.copy())
    while approx.iterations < cfg.max_iterations:
        alive = (norms > 0.0) & (norms > floors)
        if not alive.any():
            break
        sel = dictionary.draw_subdictionary(rng)
        table = dictionary.analyze(R, sel)
        coh = np.zeros(C)
        for c in np.flatnonzero(alive):
            coh[c] = float(np.max(np.abs(table.values[c]))) / float(norms[c])
        stat = float(np.sort(coh)[::-1][:k].sum() / k)
        if stat <= cfg.threshold:
            break
        column, channels = select_structured(table, cfg.l)
        atom = table.atom_at(column)
        coefs = []
        for c in channels:
            coef = float(table.values[c, column])
            dictionary.add_atom(approx.estimate[c], atom, coef)
            dictionary.add_atom(R[c], atom, -coef)
            norms[c] = np.sqrt(np.dot(R[c], R[c]))
            coefs.append(coef)
        approx.atom_ids.append(atom.id)
        approx.active_channels.append(channels)
        approx.coefs.append(coefs)
        approx.stop_stats.append(stat)
        approx.residual_norms.append(norms.copy())
    return approx


def sbird(Y, dictionary, runs=30, p=1e-6, l=1.0, master_seed=0, variant=DEFAULT_VARIANT,
          max_iterations=None, threshold=None, n_jobs=1):
    """Structured blind random pursuit denoising of ``Y`` (shape ``(C, n)``)."""
    Y = check_multichannel(Y)
    runs = check_positive_int(runs, "runs")
    p = check_probability(p)
    check_fraction(l, Y.shape[0])
    if threshold is None:
        threshold = lambda_threshold(n=dictionary.n, m=dictionary.n_atoms, p=p, variant=variant)
    if max_iterations is None:
        max_iterations = default_max_iterations(dictionary)
    cfg = StructuredConfig(threshold=threshold, max_iterations=max_iterations, l=float(l))
    streams = [derive_stream(master_seed, j) for j in range(runs)]
    approxes = run_parallel(
        run_single_structured_pursuit, [(Y, dictionary, cfg, s) for s in streams], n_jobs
    )
    estimate = dictionary.crop(average_estimates([a.estimate for a in approxes]))
    config = {
        "method": "sbird",
        "seed": int(master_seed),
        "J": runs,
        "p": p,
        "l": float(l),
        "variant": variant,
        "channels": Y.shape[0],
        "max_iterations": int(max_iterations),
        "dictionary": dictionary.get_spec(),
    }
    return DenoisedResult(estimate, approxes, threshold, config)
