"""Comparison pursuits: Stochastic MP and oracle-truncated random pursuits.

Both are "informed" methods: their stopping point comes from the noise level
or from the clean signal, which a blind denoiser never sees.
"""

import numpy as np

from ._random import derive_stream
from ._validation import ValidationError, check_positive_int, check_signal
from .pursuit import (
    DenoisedResult,
    PursuitConfig,
    average_estimates,
    default_max_iterations,
    greedy_pursuit,
    run_parallel,
    run_single_pursuit,
)


def _smp_run(y, dictionary, cfg, rng, target_residual):
    sel = dictionary.draw_subdictionary(rng)
    return greedy_pursuit(y, dictionary, cfg, lambda: sel, target_residual=target_residual)


def smp(y, dictionary, runs=30, master_seed=0, n_iterations=None, target_residual=None,
        reference=None, max_iterations=None, n_jobs=1, stream_prefix=()):
    """Stochastic MP: each run draws one subdictionary and keeps it throughout.

    Exactly one stop mode must be given: a fixed ``n_iterations``, a
    ``target_residual`` epsilon (stop once ``||r|| <= epsilon``; runs that
    cannot reach it stop at ``max_iterations`` and are flagged in
    ``info["unreached"]``), or a clean ``reference`` for the error-minimizing
    truncation.
    """
    y = check_signal(y)
    runs = check_positive_int(runs, "runs")
    modes = [m is not None for m in (n_iterations, target_residual, reference)]
    if sum(modes) != 1:
        raise ValidationError("smp needs exactly one of n_iterations, target_residual, reference")
    if max_iterations is None:
        max_iterations = default_max_iterations(dictionary)
    if n_iterations is not None:
        max_iterations = check_positive_int(n_iterations, "n_iterations")
    cfg = PursuitConfig(threshold=0.0, max_iterations=max_iterations)
    streams = [derive_stream(master_seed, (*stream_prefix, j)) for j in range(runs)]
    approxes = run_parallel(
        _smp_run, [(y, dictionary, cfg, s, target_residual) for s in streams], n_jobs
    )
    config = {
        "method": "smp",
        "seed": int(master_seed),
        "J": runs,
        "p": None,
        "variant": None,
        "max_iterations": int(max_iterations),
        "stop": "iterations" if n_iterations is not None else
                "epsilon" if target_residual is not None else "oracle",
        "dictionary": dictionary.get_spec(),
    }
    if reference is not None:
        best_k, curve, approxes = oracle_truncation(approxes, reference, dictionary)
        estimate = dictionary.crop(average_estimates([a.estimate for a in approxes]))
        return DenoisedResult(estimate, approxes, 0.0, config,
                              {"best_iterations": best_k, "error_curve": curve})
    info = {}
    if target_residual is not None:
        config["epsilon"] = float(target_residual)
        info["unreached"] = sum(a.final_residual_norm > target_residual for a in approxes)
    estimate = dictionary.crop(average_estimates([a.estimate for a in approxes]))
    return DenoisedResult(estimate, approxes, 0.0, config, info)


def truncate(approx, k, dictionary):
    """Copy of ``approx`` keeping only its first ``k`` selections."""
    from .pursuit import SparseApprox

    est = np.zeros(dictionary.padded_length)
    for atom_id, coef in zip(approx.atom_ids[:k], approx.coefs[:k]):
        dictionary.add_atom(est, dictionary.check_atom(atom_id), coef)
    return SparseApprox(
        atom_ids=approx.atom_ids[:k],
        coefs=approx.coefs[:k],
        estimate=est,
        residual_norms=approx.residual_norms[: k + 1],
        coherences=approx.coherences[:k],
        selections=approx.selections[:k],
        channel=approx.channel,
    )


def oracle_truncation(approxes, clean, dictionary):
    """Sweep the common truncation ``k`` of all runs against the clean signal.

    Returns ``(best_k, errors, truncated_runs)`` where ``errors[k]`` is the
    squared error of the ensemble average of the ``k``-truncated runs. Runs
    shorter than ``k`` contribute their full estimate.
    """
    clean = dictionary.pad(check_signal(clean, "clean"))
    J = len(approxes)
    k_max = max((a.iterations for a in approxes), default=0)
    total = np.zeros(dictionary.padded_length)
    n = dictionary.n
    errors = [float(np.sum((clean[:n] - total[:n]) ** 2))]
    for k in range(k_max):
        for a in approxes:
            if k < a.iterations:
                dictionary.add_atom(total, dictionary.check_atom(a.atom_ids[k]), a.coefs[k])
        diff = clean[:n] - total[:n] / J
        errors.append(float(np.dot(diff, diff)))
    best_k = int(np.argmin(errors))
    return best_k, errors, [truncate(a, best_k, dictionary) for a in approxes]


def rssmp_oracle(y, clean, dictionary, runs=30, max_iterations=None, master_seed=0,
                 n_jobs=1, stream_prefix=()):
    """Random sequential subdictionary MP truncated at the error-minimizing length.

    The runs are BIRD's pursuits without blind stopping (threshold 0) on the
    same random streams, so each BIRD run is a prefix of the matching run here.
    Returns ``(best_iterations, result)``; the full error curve is in
    ``result.info["error_curve"]``.
    """
    y = check_signal(y)
    runs = check_positive_int(runs, "runs")
    if max_iterations is None:
        max_iterations = default_max_iterations(dictionary)
    cfg = PursuitConfig(threshold=0.0, max_iterations=max_iterations)
    streams = [derive_stream(master_seed, (*stream_prefix, j)) for j in range(runs)]
    approxes = run_parallel(run_single_pursuit, [(y, dictionary, cfg, s) for s in streams], n_jobs)
    best_k, curve, truncated = oracle_truncation(approxes, clean, dictionary)
    estimate = dictionary.crop(average_estimates([a.estimate for a in truncated]))
    config = {
        "method": "rssmp-oracle",
        "seed": int(master_seed),
        "J": runs,
        "p": None,
        "variant": None,
        "max_iterations": int(max_iterations),
        "dictionary": dictionary.get_spec(),
    }
    return best_k, DenoisedResult(estimate, truncated, 0.0, config,
                                  {"best_iterations": best_k, "error_curve": curve})
