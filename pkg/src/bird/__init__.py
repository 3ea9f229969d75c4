"""Noise-level-blind sparse denoising with randomized matching pursuits."""

from ._random import derive_stream
from ._validation import ValidationError
from .baselines import rssmp_oracle, smp
from .bench import ansr, gen_blocks, gen_doppler, mix_at_snr, nmse
from .dictionary import MDCTDictionary, build_dictionary
from .estimators import BIRD, SBIRD
from .io import load_signal, save_signal
from .pursuit import DenoisedResult, bird, bird_multichannel, run_single_pursuit
from .stopping import calibrate_threshold_mc, erfinv, lambda_threshold
from .structured import run_single_structured_pursuit, sbird

__version__ = "0.1.0"

__all__ = [
    "BIRD",
    "SBIRD",
    "DenoisedResult",
    "MDCTDictionary",
    "ValidationError",
    "ansr",
    "bird",
    "bird_multichannel",
    "build_dictionary",
    "calibrate_threshold_mc",
    "derive_stream",
    "erfinv",
    "gen_blocks",
    "gen_doppler",
    "lambda_threshold",
    "load_signal",
    "mix_at_snr",
    "nmse",
    "rssmp_oracle",
    "run_single_pursuit",
    "run_single_structured_pursuit",
    "save_signal",
    "sbird",
    "smp",
]
