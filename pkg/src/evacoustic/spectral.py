"""STFT spectrograms and Welch power spectral densities.

Defaults mirror the analysis configuration used for the recordings: a
2048-point spectrogram (93.75 Hz bins at 192 kHz) and a 16384-point Welch
estimate (11.72 Hz bins), both Hann-windowed. Densities are one-sided and
per Hz, computed on full-scale samples, so they are "relative" PSD values.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .audio_io import AudioClip
from .errors import (
    BandOutOfRange,
    ClipTooShort,
    InvalidFftSize,
    InvalidHop,
    InvalidLength,
    InvalidOverlap,
)

WINDOW_KINDS = ("hann", "hamming", "rectangular")
DB_FLOOR = -200.0

SPECTROGRAM_FFT = 2048
SPECTROGRAM_HOP = 1024
WELCH_FFT = 16384
WELCH_OVERLAP = 0.5

_BATCH = 64  # segments transformed per rfft call; bounds peak memory


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "hann"
    length: int = WELCH_FFT

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}; expected one of {WINDOW_KINDS}")
        min_len = 1 if self.kind == "rectangular" else 2
        if int(self.length) != self.length or self.length < min_len:
            raise InvalidLength(f"{self.kind} window needs length >= {min_len}, got {self.length}")


def make_window(spec: WindowSpec, symmetric: bool = False) -> np.ndarray:
    """Window samples for ``spec``.

    The periodic form (default) is the one used for spectral averaging; the
    symmetric form (``w[n] == w[L-1-n]``) is what FIR design needs.
    """
    n_pts = spec.length
    if spec.kind == "rectangular":
        return np.ones(n_pts)
    period = n_pts - 1 if symmetric else n_pts
    phase = 2.0 * np.pi * np.arange(n_pts) / period
    if spec.kind == "hann":
        return 0.5 * (1.0 - np.cos(phase))
    return 0.54 - 0.46 * np.cos(phase)


def _one_sided_scale(fft_size: int, fs: float, window: np.ndarray) -> np.ndarray:
    n_bins = fft_size // 2 + 1
    scale = np.full(n_bins, 1.0 / (fs * np.sum(window * window)))
    last = n_bins - 1 if fft_size % 2 == 0 else n_bins
    scale[1:last] *= 2.0
    return scale


def _segment_starts(n_samples: int, size: int, step: int) -> np.ndarray:
    return np.arange(0, n_samples - size + 1, step)


def _periodograms(x: np.ndarray, starts: np.ndarray, size: int, window: np.ndarray):
    """Yield |rfft|^2 of windowed segments, in batches, in start order."""
    offsets = np.arange(size)
    for b in range(0, starts.shape[0], _BATCH):
        frames = x[starts[b : b + _BATCH, None] + offsets] * window
        spec = np.fft.rfft(frames, axis=1)
        yield spec.real**2 + spec.imag**2


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Spectrogram:
    magnitudes_db: np.ndarray  # [n_frames, n_bins]
    frame_times_s: np.ndarray
    bin_freqs_hz: np.ndarray
    fft_size: int
    hop: int
    sample_rate_hz: int

    @property
    def resolution_hz(self) -> float:
        return self.sample_rate_hz / self.fft_size

    @property
    def n_spectral_lines(self) -> int:
        """Positive-frequency lines, excluding DC."""
        return self.bin_freqs_hz.shape[0] - 1


def stft_spectrogram(
    clip: AudioClip,
    fft_size: int = SPECTROGRAM_FFT,
    hop: int = SPECTROGRAM_HOP,
    window: WindowSpec | None = None,
) -> Spectrogram:
    """Short-time power spectrum in dB.

    Frame ``f`` covers samples ``[f*hop, f*hop + fft_size)`` and is stamped
    at its centre. Each frame is scaled as a one-sided density, the same way
    ``welch_psd`` scales a segment, then converted with ``10*log10`` and
    floored at -200 dB.
    """
    if int(fft_size) != fft_size or fft_size < 64 or fft_size & (fft_size - 1):
        raise InvalidFftSize(f"fft_size must be a power of two >= 64, got {fft_size}")
    if int(hop) != hop or not 1 <= hop <= fft_size:
        raise InvalidHop(f"hop must be in [1, {fft_size}], got {hop}")
    if len(clip) < fft_size:
        raise ClipTooShort(f"clip has {len(clip)} samples, fft_size is {fft_size}")
    window = window or WindowSpec("hann", fft_size)
    if window.length != fft_size:
        window = WindowSpec(window.kind, fft_size)
    w = make_window(window)
    fs = clip.sample_rate_hz

    starts = _segment_starts(len(clip), fft_size, hop)
    scale = _one_sided_scale(fft_size, fs, w)
    power = np.concatenate(list(_periodograms(clip.samples, starts, fft_size, w))) * scale
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    db = np.maximum(db, DB_FLOOR)

    return Spectrogram(
        magnitudes_db=db,
        frame_times_s=(starts + fft_size / 2.0) / fs,
        bin_freqs_hz=np.arange(fft_size // 2 + 1) * (fs / fft_size),
        fft_size=int(fft_size),
        hop=int(hop),
        sample_rate_hz=fs,
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerSpectralDensity:
    psd: np.ndarray
    bin_freqs_hz: np.ndarray
    resolution_hz: float
    fft_size: int = 0
    n_segments: int = 0

    @property
    def n_spectral_lines(self) -> int:
        return self.bin_freqs_hz.shape[0] - 1

    def total_power(self) -> float:
        return float(np.sum(self.psd) * self.resolution_hz)

    def crop(self, f_lo: float, f_hi: float) -> "PowerSpectralDensity":
        """Bins with ``f_lo <= f <= f_hi``; used for band-limited views."""
        keep = (self.bin_freqs_hz >= f_lo) & (self.bin_freqs_hz <= f_hi)
        return PowerSpectralDensity(
            self.psd[keep], self.bin_freqs_hz[keep], self.resolution_hz, self.fft_size, self.n_segments
        )


def welch_psd(
    clip: AudioClip,
    fft_size: int = WELCH_FFT,
    overlap_fraction: float = WELCH_OVERLAP,
    window: WindowSpec | None = None,
) -> PowerSpectralDensity:
    """Welch averaged-periodogram PSD, one-sided, per Hz.

    Segments of ``fft_size`` samples start every
    ``round(fft_size * (1 - overlap_fraction))`` samples; a trailing partial
    segment is dropped. Each periodogram is scaled by ``1 / (fs * sum(w**2))``
    and interior bins are doubled, so ``sum(psd) * resolution_hz`` is the
    mean-square of the input.
    """
    if int(fft_size) != fft_size or fft_size < 2:
        raise InvalidFftSize(f"fft_size must be an integer >= 2, got {fft_size}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise InvalidOverlap(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")
    if len(clip) < fft_size:
        raise ClipTooShort(f"clip has {len(clip)} samples, fft_size is {fft_size}")
    window = window or WindowSpec("hann", fft_size)
    if window.length != fft_size:
        window = WindowSpec(window.kind, fft_size)
    w = make_window(window)
    fs = clip.sample_rate_hz

    step = max(1, int(round(fft_size * (1.0 - overlap_fraction))))
    starts = _segment_starts(len(clip), fft_size, step)
    acc = np.zeros(fft_size // 2 + 1)
    for batch in _periodograms(clip.samples, starts, fft_size, w):
        # row-by-row keeps the summation order independent of batch size
        for row in batch:
            acc += row
    psd = acc * _one_sided_scale(fft_size, fs, w) / starts.shape[0]

    return PowerSpectralDensity(
        psd=psd,
        bin_freqs_hz=np.arange(fft_size // 2 + 1) * (fs / fft_size),
        resolution_hz=fs / fft_size,
        fft_size=int(fft_size),
        n_segments=int(starts.shape[0]),
    )


def band_power(psd: PowerSpectralDensity, f_lo: float, f_hi: float) -> float:
    """Integrated PSD over bins with ``f_lo <= f <= f_hi``."""
    f_max = psd.bin_freqs_hz[-1]
    if not 0.0 <= f_lo < f_hi <= f_max:
        raise BandOutOfRange(f"band [{f_lo}, {f_hi}] Hz must satisfy 0 <= lo < hi <= {f_max}")
    keep = (psd.bin_freqs_hz >= f_lo) & (psd.bin_freqs_hz <= f_hi)
    return float(np.sum(psd.psd[keep]) * psd.resolution_hz)


# ---------------------------------------------------------------------------
# CSV export


def fmt_number(value: float) -> str:
    return f"{value:.12g}"


def _row(values) -> str:
    return ",".join(fmt_number(v) for v in values)


def write_psd_csv(psd: PowerSpectralDensity, out: TextIO) -> None:
    """Header row of bin frequencies (Hz), then one row of PSD values."""
    out.write(_row(psd.bin_freqs_hz) + "\n")
    out.write(_row(psd.psd) + "\n")


def write_spectrogram_csv(spec: Spectrogram, out: TextIO, f_lo: float | None = None, f_hi: float | None = None) -> None:
    """``time_s`` column followed by one dB column per frequency bin."""
    keep = np.ones(spec.bin_freqs_hz.shape[0], dtype=bool)
    if f_lo is not None:
        keep &= spec.bin_freqs_hz >= f_lo
    if f_hi is not None:
        keep &= spec.bin_freqs_hz <= f_hi
    out.write("time_s," + _row(spec.bin_freqs_hz[keep]) + "\n")
    for t, frame in zip(spec.frame_times_s, spec.magnitudes_db[:, keep]):
        out.write(fmt_number(t) + "," + _row(frame) + "\n")
