"""Linear-phase FIR bandpass design and application.

The detector band (16-60 kHz) is isolated with a Hann-windowed sinc of
order 512. Filtering keeps only the fully-overlapped part of the
convolution, so output sample ``j`` lines up with input sample
``j + (N - 1) / 2``; callers shift timestamps by ``filter.delay_s``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .audio_io import AudioClip
from .errors import (
    ClipShorterThanFilter,
    FreqOutOfRange,
    InvalidBand,
    InvalidOrder,
    OrderTooSmall,
    SampleRateMismatch,
)
from .spectral import DB_FLOOR, WindowSpec, make_window

DEFAULT_F_LO = 16_000.0
DEFAULT_F_HI = 60_000.0
DEFAULT_ORDER = 512
MIN_ORDER = 64
MIDBAND_TOL_DB = 1.0
DC_GAIN_MAX = 1e-3


@dataclass(frozen=True)
class FirDesign:
    f_lo_hz: float
    f_hi_hz: float
    order: int
    window_kind: str
    fs_hz: float


@dataclass(frozen=True)
class FirFilter:
    coefficients: np.ndarray
    fs_hz: float
    design: FirDesign | None = None

    def __post_init__(self):
        h = np.array(self.coefficients, dtype=np.float64, copy=True).reshape(-1)
        if h.shape[0] % 2 == 0:
            raise InvalidOrder(f"tap count must be odd (type-I linear phase), got {h.shape[0]}")
        if not np.array_equal(h, h[::-1]):
            raise InvalidOrder("coefficients must be symmetric")
        if self.fs_hz <= 0:
            raise ValueError("fs_hz must be positive")
        h.setflags(write=False)
        object.__setattr__(self, "coefficients", h)

    @property
    def n_taps(self) -> int:
        return self.coefficients.shape[0]

    @property
    def delay_samples(self) -> int:
        return (self.n_taps - 1) // 2

    @property
    def delay_s(self) -> float:
        return self.delay_samples / self.fs_hz


def design_bandpass(
    f_lo: float = DEFAULT_F_LO,
    f_hi: float = DEFAULT_F_HI,
    order: int = DEFAULT_ORDER,
    fs: float = 192_000.0,
    window: WindowSpec | str = "hann",
) -> FirFilter:
    """Windowed-sinc bandpass with ``order + 1`` taps.

    Raises ``OrderTooSmall`` if the result misses unity gain at the band
    centre by more than 1 dB, and ``InvalidBand`` if the lower edge is so
    close to DC that the DC gain exceeds 1e-3.
    """
    if not 0.0 < f_lo < f_hi < fs / 2.0:
        raise InvalidBand(f"need 0 < f_lo < f_hi < fs/2, got f_lo={f_lo} f_hi={f_hi} fs={fs}")
    if int(order) != order or order % 2:
        raise InvalidOrder(f"order must be an even integer, got {order}")
    if order < MIN_ORDER:
        raise OrderTooSmall(f"order must be >= {MIN_ORDER}, got {order}")
    kind = window.kind if isinstance(window, WindowSpec) else window

    n = np.arange(order + 1)
    m = order // 2
    hi, lo = 2.0 * f_hi / fs, 2.0 * f_lo / fs
    ideal = hi * np.sinc(hi * (n - m)) - lo * np.sinc(lo * (n - m))
    h = ideal * make_window(WindowSpec(kind, order + 1), symmetric=True)
    h = 0.5 * (h + h[::-1])  # exact symmetry despite rounding in sinc

    filt = FirFilter(h, fs, FirDesign(float(f_lo), float(f_hi), int(order), kind, float(fs)))
    mid_db = frequency_response(filt, [(f_lo + f_hi) / 2.0])[0]
    if abs(mid_db) > MIDBAND_TOL_DB:
        raise OrderTooSmall(f"order {order} gives {mid_db:.2f} dB at band centre")
    if abs(np.sum(h)) > DC_GAIN_MAX:
        raise InvalidBand(f"f_lo={f_lo} Hz is too close to DC for order {order} (DC gain {abs(np.sum(h)):.2e})")
    return filt


def apply_filter(filt: FirFilter, clip: AudioClip) -> AudioClip:
    """Convolve and keep the ``len(clip) - N + 1`` fully-overlapped samples."""
    if clip.sample_rate_hz != filt.fs_hz:
        raise SampleRateMismatch(f"clip is {clip.sample_rate_hz} Hz, filter designed for {filt.fs_hz} Hz")
    if len(clip) < filt.n_taps:
        raise ClipShorterThanFilter(f"clip has {len(clip)} samples, filter has {filt.n_taps} taps")
    return AudioClip(kernels.fir_valid(clip.samples, filt.coefficients), clip.sample_rate_hz)


def frequency_response(filt: FirFilter, freqs) -> np.ndarray:
    """Magnitude response in dB at each frequency, floored at -200 dB."""
    f = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    if np.any(f < 0) or np.any(f > filt.fs_hz / 2.0):
        raise FreqOutOfRange(f"frequencies must lie in [0, {filt.fs_hz / 2}]")
    n = np.arange(filt.n_taps)
    mags = np.empty(f.shape[0])
    for i in range(0, f.shape[0], 256):
        chunk = f[i : i + 256]
        basis = np.exp(-2j * np.pi * np.outer(chunk, n) / filt.fs_hz)
        mags[i : i + 256] = np.abs(basis @ filt.coefficients)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mags)
    return np.maximum(db, DB_FLOOR)


def save_coefficients(filt: FirFilter, path) -> None:
    """One tap per line, 17 significant digits (round-trips exactly)."""
    Path(path).write_text("".join(f"{c:.17g}\n" for c in filt.coefficients))


def load_coefficients(path, fs_hz: float) -> FirFilter:
    taps = [float(line) for line in Path(path).read_text().split() if line]
    return FirFilter(np.array(taps), fs_hz)
