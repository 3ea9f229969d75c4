"""Multiscale shift-invariant MDCT dictionary.

The dictionary is a union of orthonormal MDCT bases. For a window length
``L`` (the *scale*) the hop is ``h = L // 2`` and each frame carries ``h``
frequency bins; the sine window satisfies the Princen-Bradley condition so
every basis is orthonormal. Each scale is replicated at ``g`` sub-hop shift
offsets, giving ``M = g * n_scales * P`` atoms where ``P`` is the working
length.

Signals are zero-padded at the end to ``P``, the smallest multiple of the
scales' least common multiple (the largest scale, for powers of two) that is
``>= N``, and frames wrap circularly on ``[0, P)``.
The wrap makes every shifted basis exactly orthonormal on ``R^P``, so atoms
need no boundary renormalization and always have unit norm.

Atom ids pack ``(scale_idx, shift_idx, time_index, freq_bin)`` as::

    bits 56..62  scale_idx   (7 bits)
    bits 44..55  shift_idx   (12 bits)
    bits 24..43  time_index  (20 bits)
    bits  0..23  freq_bin    (24 bits)

so ids sort by scale, then shift, then frame, then frequency.

Shift offsets are ``floor(i * h / g)`` for ``i < g``. When ``g > h`` (small
scales with a large ``g``) some offsets coincide and the corresponding atoms
are duplicates; they are still counted in ``M``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import ValidationError, check_positive_int

DEFAULT_SCALES = (32, 64, 128, 256, 512, 1024)
DEFAULT_SHIFT_GRANULARITY = 64

_FREQ_BITS, _TIME_BITS, _SHIFT_BITS, _SCALE_BITS = 24, 20, 12, 7
_TIME_SHIFT = _FREQ_BITS
_SHIFT_SHIFT = _FREQ_BITS + _TIME_BITS
_SCALE_SHIFT = _FREQ_BITS + _TIME_BITS + _SHIFT_BITS


@dataclass(frozen=True)
class Atom:
    scale_idx: int
    shift_idx: int
    time_index: int
    freq_bin: int

    @property
    def id(self):
        return encode_atom_id(self.scale_idx, self.shift_idx, self.time_index, self.freq_bin)


def encode_atom_id(scale_idx, shift_idx, time_index, freq_bin):
    return (
        (int(scale_idx) << _SCALE_SHIFT)
        | (int(shift_idx) << _SHIFT_SHIFT)
        | (int(time_index) << _TIME_SHIFT)
        | int(freq_bin)
    )


def decode_atom_id(atom_id):
    atom_id = int(atom_id)
    return Atom(
        scale_idx=(atom_id >> _SCALE_SHIFT) & ((1 << _SCALE_BITS) - 1),
        shift_idx=(atom_id >> _SHIFT_SHIFT) & ((1 << _SHIFT_BITS) - 1),
        time_index=(atom_id >> _TIME_SHIFT) & ((1 << _TIME_BITS) - 1),
        freq_bin=atom_id & ((1 << _FREQ_BITS) - 1),
    )


@dataclass(frozen=True)
class SubdictionarySelection:
    """One shift offset index per scale; implies the atom set of one draw."""

    shift_indices: tuple

    def __len__(self):
        return len(self.shift_indices)


@dataclass
class ProjectionTable:
    """Inner products of one or more residuals with every atom of a draw.

    ``values`` has shape ``(n_channels, n_atoms_in_draw)``; columns are in
    increasing atom-id order. ``offsets[s]`` is the first column of scale ``s``.
    """

    selection: SubdictionarySelection
    values: np.ndarray
    offsets: np.ndarray
    hops: tuple

    def __len__(self):
        return self.values.shape[1]

    def atom_at(self, column):
        """Atom at a column of ``values``."""
        s = int(np.searchsorted(self.offsets, column, side="right")) - 1
        local = int(column) - int(self.offsets[s])
        h = self.hops[s]
        return Atom(s, int(self.selection.shift_indices[s]), local // h, local % h)

    def argmax(self, channel=0):
        """Column of the largest magnitude (lowest atom id on ties) and its value."""
        row = self.values[channel]
        column = int(np.argmax(np.abs(row)))
        return column, float(row[column])


class MDCTDictionary:
    """Union of shifted orthonormal MDCT bases acting on signals of length ``n``.

    Parameters
    ----------
    scales : sequence of int
        Window lengths in samples. Each must be even and ``<= n``.
    n : int
        Signal length.
    shift_granularity : int
        Number of sub-hop shift offsets per scale (``g``).
    """

    def __init__(self, scales=DEFAULT_SCALES, n=1024, shift_granularity=DEFAULT_SHIFT_GRANULARITY):
        n = check_positive_int(n, "n")
        g = check_positive_int(shift_granularity, "shift_granularity")
        scales = tuple(int(L) for L in scales)
        if not scales:
            raise ValidationError("at least one scale is required")
        if len(set(scales)) != len(scales):
            raise ValidationError(f"duplicate scales in {scales}")
        for L in scales:
            if L < 2 or L % 2:
                raise ValidationError(f"scale {L} must be an even positive integer")
            if L > n:
                raise ValidationError(f"scale {L} exceeds the signal length {n}")
        if len(scales) >= 1 << _SCALE_BITS or g >= 1 << _SHIFT_BITS:
            raise ValidationError("too many scales or shift offsets for the atom id layout")
        self.scales = scales
        self.n = n
        self.shift_granularity = g
        step = int(np.lcm.reduce(np.array(scales, dtype=np.int64)))
        self.padded_length = -(-n // step) * step
        P = self.padded_length
        if P > 4 * n:
            raise ValidationError(
                f"scales {scales} have least common multiple {step}, padding {n} samples to {P}; "
                "use commensurate scales such as powers of two"
            )
        if P // 2 >= 1 << _TIME_BITS or max(scales) // 2 >= 1 << _FREQ_BITS:
            raise ValidationError("signal too long for the atom id layout")
        self.hops = tuple(L // 2 for L in scales)
        self.shift_offsets = tuple(
            tuple((i * h) // g for i in range(g)) for h in self.hops
        )
        self._kernels = [_MDCTKernel(L) for L in scales]
        self._offsets = np.array([s * P for s in range(len(scales))], dtype=np.int64)

    def __repr__(self):
        return (
            f"MDCTDictionary(scales={list(self.scales)}, n={self.n}, "
            f"shift_granularity={self.shift_granularity})"
        )

    def get_spec(self):
        return {
            "scales": list(self.scales),
            "n": self.n,
            "shift_granularity": self.shift_granularity,
            "padded_length": self.padded_length,
        }

    @property
    def n_atoms(self):
        """Total atom count ``M``."""
        return self.shift_granularity * len(self.scales) * self.padded_length

    @property
    def subdictionary_size(self):
        """Atoms per random draw, ``M / g``."""
        return len(self.scales) * self.padded_length

    # -- padding ---------------------------------------------------------

    def pad(self, x):
        """Zero-pad the last axis from ``n`` to ``padded_length``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] == self.padded_length:
            return x.copy()
        if x.shape[-1] != self.n:
            raise ValidationError(
                f"signal length {x.shape[-1]} does not match dictionary length {self.n}"
            )
        width = [(0, 0)] * (x.ndim - 1) + [(0, self.padded_length - self.n)]
        return np.pad(x, width)

    def crop(self, x):
        return np.asarray(x)[..., : self.n]

    # -- random subdictionaries -----------------------------------------

    def draw_subdictionary(self, rng):
        """Draw one shift offset per scale, uniformly and independently."""
        if self.shift_granularity == 1:
            return SubdictionarySelection((0,) * len(self.scales))
        idx = rng.integers(self.shift_granularity, size=len(self.scales))
        return SubdictionarySelection(tuple(int(i) for i in idx))

    def all_selections(self):
        """The ``g`` selections that together cover every atom exactly once."""
        return [SubdictionarySelection((i,) * len(self.scales)) for i in range(self.shift_granularity)]

    # -- transforms ------------------------------------------------------

    def _check_selection(self, sel):
        if len(sel.shift_indices) != len(self.scales):
            raise ValidationError("selection does not match the number of scales")
        for i in sel.shift_indices:
            if not 0 <= i < self.shift_granularity:
                raise ValidationError(f"shift index {i} out of range")

    def _as_padded_2d(self, r):
        r = np.asarray(r, dtype=np.float64)
        if r.ndim == 1:
            r = r[np.newaxis, :]
        if r.ndim != 2:
            raise ValidationError(f"expected 1-D or 2-D input, got shape {r.shape}")
        if r.shape[1] == self.n and self.n != self.padded_length:
            r = self.pad(r)
        elif r.shape[1] != self.padded_length:
            raise ValidationError(
                f"signal length {r.shape[1]} does not match dictionary length {self.n}"
            )
        return r

    def analyze_basis(self, r, scale_idx, shift_idx):
        """Coefficients of ``r`` on one shifted basis, shape ``(C, n_frames, h)``."""
        r = self._as_padded_2d(r)
        s = self.shift_offsets[scale_idx][shift_idx]
        return self._kernels[scale_idx].forward(np.roll(r, -s, axis=1))

    def synthesize_basis(self, coefs, scale_idx, shift_idx):
        """Adjoint of :meth:`analyze_basis`; returns shape ``(C, P)``."""
        coefs = np.asarray(coefs, dtype=np.float64)
        squeeze = coefs.ndim == 2
        if squeeze:
            coefs = coefs[np.newaxis]
        h = self.hops[scale_idx]
        if coefs.shape[1:] != (self.padded_length // h, h):
            raise ValidationError(f"coefficient array has shape {coefs.shape[1:]}")
        s = self.shift_offsets[scale_idx][shift_idx]
        out = np.roll(self._kernels[scale_idx].inverse(coefs), s, axis=1)
        return out[0] if squeeze else out

    def analyze(self, r, selection):
        """Inner products of ``r`` with all atoms of ``selection``.

        ``r`` is 1-D or ``(C, length)`` with length ``n`` or ``padded_length``.
        """
        self._check_selection(selection)
        r = self._as_padded_2d(r)
        blocks = [
            self.analyze_basis(r, s, i).reshape(r.shape[0], -1)
            for s, i in enumerate(selection.shift_indices)
        ]
        return ProjectionTable(selection, np.concatenate(blocks, axis=1), self._offsets, self.hops)

    def analyze_all(self, r):
        """Inner products with every atom, shape ``(C, M)`` in atom-id order."""
        r = self._as_padded_2d(r)
        out = []
        for s in range(len(self.scales)):
            for i in range(self.shift_granularity):
                out.append(self.analyze_basis(r, s, i).reshape(r.shape[0], -1))
        return np.concatenate(out, axis=1)

    # -- atoms -----------------------------------------------------------

    def check_atom(self, atom):
        if isinstance(atom, (int, np.integer)):
            atom = decode_atom_id(atom)
        if not 0 <= atom.scale_idx < len(self.scales):
            raise ValidationError(f"scale index {atom.scale_idx} out of range")
        h = self.hops[atom.scale_idx]
        if not 0 <= atom.shift_idx < self.shift_granularity:
            raise ValidationError(f"shift index {atom.shift_idx} out of range")
        if not 0 <= atom.time_index < self.padded_length // h:
            raise ValidationError(f"time index {atom.time_index} out of range")
        if not 0 <= atom.freq_bin < h:
            raise ValidationError(f"frequency bin {atom.freq_bin} out of range")
        return atom

    def atom_support(self, atom):
        """Sample indices and values of an atom's window (length ``L``)."""
        atom = self.check_atom(atom)
        L = self.scales[atom.scale_idx]
        h = L // 2
        start = atom.time_index * h + self.shift_offsets[atom.scale_idx][atom.shift_idx]
        idx = (start + np.arange(L)) % self.padded_length
        return idx, self._kernels[atom.scale_idx].waveform(atom.freq_bin)

    def synthesize_atom(self, atom):
        """Unit-norm waveform of ``atom`` on the padded domain (length ``P``)."""
        idx, values = self.atom_support(atom)
        out = np.zeros(self.padded_length)
        np.add.at(out, idx, values)
        return out

    def add_atom(self, x, atom, coef):
        """In place ``x += coef * atom`` on a padded 1-D buffer."""
        idx, values = self.atom_support(atom)
        x[idx] += coef * values

    def reconstruct(self, selections):
        """Sum of ``coef * atom`` over ``(atom_or_id, coef)`` pairs; length ``P``."""
        out = np.zeros(self.padded_length)
        for atom, coef in selections:
            atom = self.check_atom(atom)
            self.add_atom(out, atom, coef)
        return out


class _MDCTKernel:
    """Orthonormal MDCT of window length ``L`` applied to circular frames."""

    def __init__(self, L):
        self.L = L
        h = L // 2
        self.h = h
        n = np.arange(L)
        f = np.arange(h)
        self.n0 = (h + 1) / 2.0
        self.window = np.sin(np.pi * (n + 0.5) / L)
        self.scale = np.sqrt(2.0 / h)
        self._pre = self.window * np.exp(-1j * np.pi * n / L)
        self._post = self.scale * np.exp(-1j * np.pi * self.n0 * (f + 0.5) / h)
        self._ipre = np.exp(1j * np.pi * self.n0 * (f + 0.5) / h)
        self._ipost = self.scale * L * self.window * np.exp(1j * np.pi * n / L)

    def frames(self, x):
        """Circular frames of hop ``h``: shape ``(C, P // h, L)``."""
        ext = np.concatenate([x, x[:, : self.h]], axis=1)
        return np.lib.stride_tricks.sliding_window_view(ext, self.L, axis=1)[:, :: self.h, :]

    def forward(self, x):
        spec = np.fft.fft(self.frames(x) * self._pre, axis=-1)[..., : self.h]
        return np.real(spec * self._post)

    def inverse(self, coefs):
        C, K, h = coefs.shape
        buf = np.zeros((C, K, self.L), dtype=complex)
        buf[..., :h] = coefs * self._ipre
        frames = np.real(np.fft.ifft(buf, axis=-1) * self._ipost)
        # overlap-add: second half of frame k lands on the first half of frame k+1
        blocks = frames[..., :h] + np.roll(frames[..., h:], 1, axis=1)
        return blocks.reshape(C, K * h)

    def waveform(self, freq_bin):
        n = np.arange(self.L)
        return self.scale * self.window * np.cos(np.pi / self.h * (n + self.n0) * (freq_bin + 0.5))


def default_scales(n, scales=None):
    """``scales`` if given, else the default scales that fit in ``n`` samples."""
    if scales is not None:
        return tuple(scales)
    fitting = tuple(L for L in DEFAULT_SCALES if L <= n)
    if not fitting:
        raise ValidationError(f"signal of length {n} is shorter than the smallest default scale")
    return fitting


def build_dictionary(scales=DEFAULT_SCALES, n=1024, shift_granularity=DEFAULT_SHIFT_GRANULARITY):
    return MDCTDictionary(scales=scales, n=n, shift_granularity=shift_granularity)
