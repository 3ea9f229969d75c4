"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical or
validation error. Failures print a single line on stderr.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import bench
from ._random import derive_stream
from ._validation import ValidationError
from .dictionary import DEFAULT_SHIFT_GRANULARITY, MDCTDictionary, default_scales
from .io import FORMATS, load_signal, save_signal
from .pursuit import bird, bird_multichannel
from .stopping import DEFAULT_VARIANT, VARIANTS, calibrate_threshold_mc, lambda_threshold
from .structured import sbird

DEFAULT_SEED = 0

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _probability(text):
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < p < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return p


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _fraction(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return v


def _finite_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return v


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_dictionary_flags(sp):
    sp.add_argument("--scales", type=_int_list, default=None,
                    help="comma-separated MDCT window lengths (default: 32..1024 that fit)")
    sp.add_argument("--shift-granularity", type=_positive_int, default=DEFAULT_SHIFT_GRANULARITY)


def _add_denoise_flags(sp):
    sp.add_argument("--input", required=True)
    sp.add_argument("--format", choices=FORMATS, default=None)
    sp.add_argument("--header", action="store_true", help="CSV input has a header row")
    sp.add_argument("--runs", type=_positive_int, default=30)
    sp.add_argument("--p", type=_probability, default=1e-6)
    sp.add_argument("--variant", choices=VARIANTS, default=DEFAULT_VARIANT)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--max-iter", type=_positive_int, default=None)
    sp.add_argument("--jobs", type=_positive_int, default=1)
    sp.add_argument("--reference", default=None, help="clean signal for NMSE in the report")
    sp.add_argument("--out", required=True)
    sp.add_argument("--report", default=None)
    _add_dictionary_flags(sp)


def build_parser():
    parser = _Parser(prog="bird", description="Blind random pursuit denoising.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("threshold", help="print the blind stopping threshold")
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--m", type=_positive_int, default=None,
                    help="dictionary size (default: size of the dictionary built from --n)")
    sp.add_argument("--p", type=_probability, default=1e-6)
    sp.add_argument("--variant", choices=VARIANTS, default=DEFAULT_VARIANT)
    sp.add_argument("--mc-trials", type=_positive_int, default=None)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_dictionary_flags(sp)

    sp = sub.add_parser("simulate", help="write a synthetic noisy signal")
    sp.add_argument("--signal", choices=bench.SIGNALS, required=True)
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--channels", type=_positive_int, default=1)
    sp.add_argument("--snr", type=_finite_float, required=True)
    sp.add_argument("--noise", choices=("white", "ar"), default="white")
    sp.add_argument("--ar-coeffs", type=_float_list, default=list(bench.DEFAULT_AR_COEFFS))
    sp.add_argument("--n-atoms", type=_positive_int, default=5, help="atoms in the evoked signal")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--format", choices=FORMATS, default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--clean-out", default=None)
    _add_dictionary_flags(sp)

    sp = sub.add_parser("denoise", help="BIRD, channel by channel")
    _add_denoise_flags(sp)

    sp = sub.add_parser("denoise-multi", help="structured S-BIRD across channels")
    _add_denoise_flags(sp)
    sp.add_argument("--l", type=_fraction, default=1.0)

    sp = sub.add_parser("bench", help="run a benchmark sweep")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--jobs", type=_positive_int, default=1)
    sp.add_argument("--timing", action="store_true", help="fill wall_time_ms (non-reproducible)")
    return parser


def _dictionary(args, n):
    return MDCTDictionary(default_scales(n, args.scales), n, args.shift_granularity)


def cmd_threshold(args):
    m = args.m
    D = None
    if m is None or args.mc_trials:
        D = _dictionary(args, args.n)
        m = m or D.n_atoms
    lam = lambda_threshold(n=args.n, m=m, p=args.p, variant=args.variant)
    print(repr(lam))
    if args.mc_trials:
        mc = calibrate_threshold_mc(D, args.p, args.mc_trials, derive_stream(args.seed, 0))
        print(repr(mc))


def cmd_simulate(args):
    D = _dictionary(args, args.n)
    rng = derive_stream(args.seed, 0)
    if args.signal == "evoked":
        clean = bench.gen_evoked(D, args.channels, rng, n_atoms=args.n_atoms)
    else:
        clean = bench.make_clean(args.signal, D, args.channels, rng)
    noise = bench.gen_noise(bench.NoiseSpec(args.noise, tuple(args.ar_coeffs)), args.n, args.channels, rng)
    save_signal(bench.mix_at_snr(clean, noise, args.snr), args.out, args.format)
    if args.clean_out:
        save_signal(clean, args.clean_out, args.format)


def _denoise(args, structured):
    Y = load_signal(args.input, args.format, header=args.header)
    reference = None
    if args.reference:
        reference = load_signal(args.reference, args.format, header=args.header)
        if reference.shape != Y.shape:
            raise ValidationError(f"reference shape {reference.shape} differs from input {Y.shape}")
    D = _dictionary(args, Y.shape[1])
    if structured:
        res = sbird(Y, D, args.runs, args.p, args.l, args.seed, args.variant, args.max_iter,
                    n_jobs=args.jobs)
    elif Y.shape[0] == 1:
        res = bird(Y[0], D, args.runs, args.p, args.seed, args.variant, args.max_iter,
                   n_jobs=args.jobs)
        res.estimate = res.estimate[np.newaxis]
    else:
        res = bird_multichannel(Y, D, args.runs, args.p, args.seed, args.variant, args.max_iter,
                                n_jobs=args.jobs)
    save_signal(res.estimate, args.out, args.format)
    if args.report:
        res.config["cli"] = {k: v for k, v in sorted(vars(args).items()) if k not in ("jobs", "func")}
        with open(args.report, "w") as fh:
            json.dump(res.to_dict(reference=reference), fh, indent=1, sort_keys=True)
            fh.write("\n")


def cmd_denoise(args):
    _denoise(args, structured=False)


def cmd_denoise_multi(args):
    _denoise(args, structured=True)


def cmd_bench(args):
    config = bench.load_bench_config(args.config)
    rows = bench.run_benchmark(config, n_jobs=args.jobs, timing=args.timing)
    bench.write_bench_csv(rows, args.out)


COMMANDS = {
    "threshold": cmd_threshold,
    "simulate": cmd_simulate,
    "denoise": cmd_denoise,
    "denoise-multi": cmd_denoise_multi,
    "bench": cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"bird: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except (ValidationError, ValueError, FloatingPointError) as exc:
        print(f"bird: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"bird: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
