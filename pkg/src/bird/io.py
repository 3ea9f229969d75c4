"""Reading and writing signals.

Two formats are supported:

``raw-f64``
    Little-endian IEEE-754 float64 samples, channel-contiguous (all samples of
    channel 0, then channel 1, ...), with a JSON sidecar ``<path>.json`` holding
    ``{"n": n_times, "c": n_channels}``.
``csv``
    One row per sample, one column per channel, ``,`` delimiter, ``.`` decimal
    separator, values written with 17 significant digits. An optional header
    row is accepted on read with ``header=True``.

In memory a multichannel signal is an array of shape ``(n_channels, n_times)``.
"""

import csv
import json
import math
import os

import numpy as np

from ._validation import ValidationError, check_multichannel

FORMATS = ("raw-f64", "csv")


class SignalFormatError(ValidationError):
    """Malformed signal file (shape mismatch, non-numeric cell, NaN/Inf)."""


def sidecar_path(path):
    return os.fspath(path) + ".json"


def infer_format(path):
    return "csv" if os.fspath(path).lower().endswith(".csv") else "raw-f64"


def load_signal(path, format=None, header=False):
    """Load a multichannel signal of shape ``(n_channels, n_times)``.

    Raises ``FileNotFoundError`` for a missing file and ``SignalFormatError``
    for malformed content.
    """
    format = format or infer_format(path)
    if format == "raw-f64":
        Y = _load_raw(path)
    elif format == "csv":
        Y = _load_csv(path, header)
    else:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    if not np.all(np.isfinite(Y)):
        raise SignalFormatError(f"{path}: NaN or Inf value")
    return Y


def _load_raw(path):
    with open(sidecar_path(path)) as fh:
        meta = json.load(fh)
    try:
        n, c = int(meta["n"]), int(meta["c"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SignalFormatError(f"{sidecar_path(path)}: sidecar must declare integer 'n' and 'c'") from exc
    if n < 1 or c < 1:
        raise SignalFormatError(f"{sidecar_path(path)}: n and c must be positive")
    data = np.fromfile(path, dtype="<f8")
    if data.size != n * c:
        raise SignalFormatError(
            f"{path}: sidecar declares n={n}, c={c} ({n * c} values) but file holds {data.size}"
        )
    return data.astype(np.float64).reshape(c, n)


def _load_csv(path, header):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if header and i == 0:
                continue
            if not row:
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise SignalFormatError(f"{path}:{i + 1}: non-numeric cell") from exc
    if not rows:
        raise SignalFormatError(f"{path}: no samples")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise SignalFormatError(f"{path}: ragged rows")
    return np.array(rows, dtype=np.float64).T.copy()


def save_signal(Y, path, format=None, header=False):
    """Write ``Y`` (1-D or ``(n_channels, n_times)``) to ``path``."""
    Y = check_multichannel(Y)
    format = format or infer_format(path)
    if format == "raw-f64":
        np.ascontiguousarray(Y, dtype="<f8").tofile(path)
        with open(sidecar_path(path), "w") as fh:
            json.dump({"n": Y.shape[1], "c": Y.shape[0]}, fh)
    elif format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if header:
                writer.writerow([f"ch{c}" for c in range(Y.shape[0])])
            for row in Y.T:
                writer.writerow([_fmt(v) for v in row])
    else:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def _fmt(v):
    # repr is the shortest string that round-trips exactly
    return repr(float(v)) if math.isfinite(v) else str(v)
