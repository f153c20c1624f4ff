"""Band summaries of PSDs in the layout of the per-vehicle PSD table."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyInput, WindowOutOfRange
from .spectral import PowerSpectralDensity

ANALYSIS_LO = 15_000.0
ANALYSIS_HI = 60_000.0
PROMINENCE = 10.0
GAP_BINS = 3
MIN_WIDTH_HZ = 100.0


@dataclass(frozen=True)
class FreqRange:
    lo_hz: float
    hi_hz: float

    @property
    def width_hz(self) -> float:
        return self.hi_hz - self.lo_hz


@dataclass(frozen=True)
class BandSummary:
    ranges: tuple[FreqRange, ...]
    strongest_freq_hz: float
    strongest_psd: float
    noise_floor: float

    @property
    def has_signal(self) -> bool:
        return bool(self.ranges)

    @property
    def total_range_hz(self) -> float:
        return float(sum(r.width_hz for r in self.ranges))

    def to_dict(self) -> dict:
        return {
            "ranges": [{"lo_hz": r.lo_hz, "hi_hz": r.hi_hz} for r in self.ranges],
            "strongest_freq_hz": self.strongest_freq_hz,
            "strongest_psd": self.strongest_psd,
            "noise_floor": self.noise_floor,
        }


def _signal_runs(mask: np.ndarray, gap_bins: int) -> list[tuple[int, int]]:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    runs = []
    first = prev = int(idx[0])
    for i in idx[1:]:
        i = int(i)
        if i - prev - 1 > gap_bins:
            runs.append((first, prev))
            first = i
        prev = i
    runs.append((first, prev))
    return runs


def summarize_bands(
    psd: PowerSpectralDensity,
    analysis_lo: float = ANALYSIS_LO,
    analysis_hi: float = ANALYSIS_HI,
    prominence_factor: float = PROMINENCE,
) -> BandSummary:
    """Find the high-frequency ranges of a PSD.

    The noise floor is the median PSD in the analysis window. Bins more than
    ``prominence_factor`` times above it are signal; signal runs separated
    by at most 3 bins are joined, and ranges narrower than 100 Hz dropped.
    A spectrum with no qualifying bins yields empty ``ranges``.
    """
    f = psd.bin_freqs_hz
    if not 0.0 <= analysis_lo < analysis_hi <= f[-1]:
        raise WindowOutOfRange(f"window [{analysis_lo}, {analysis_hi}] Hz outside PSD range [0, {f[-1]}]")
    if not prominence_factor > 1:
        raise ValueError(f"prominence_factor must be > 1, got {prominence_factor}")
    sel = np.flatnonzero((f >= analysis_lo) & (f <= analysis_hi))
    if sel.size == 0:
        raise WindowOutOfRange("analysis window contains no bins")
    values = psd.psd[sel]
    freqs = f[sel]

    floor = float(np.median(values))
    peak = int(np.argmax(values))
    ranges = []
    for a, b in _signal_runs(values > prominence_factor * floor, GAP_BINS):
        if freqs[b] - freqs[a] >= MIN_WIDTH_HZ:
            ranges.append(FreqRange(float(freqs[a]), float(freqs[b])))
    return BandSummary(tuple(ranges), float(freqs[peak]), float(values[peak]), floor)


@dataclass(frozen=True)
class ProfileRow:
    rank: int
    label: str
    summary: BandSummary

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "label": self.label,
            "total_range_hz": self.summary.total_range_hz,
            **self.summary.to_dict(),
        }


def compare_profiles(summaries: Sequence[tuple[str, BandSummary]]) -> list[ProfileRow]:
    """Rank by strongest PSD, descending; ties broken by label."""
    if not summaries:
        raise EmptyInput("need at least one summary")
    ordered = sorted(summaries, key=lambda item: (-item[1].strongest_psd, item[0]))
    return [ProfileRow(i + 1, label, s) for i, (label, s) in enumerate(ordered)]


# ---------------------------------------------------------------------------
# rendering


def _khz(hz: float) -> str:
    k = round(hz / 1000.0, 1)
    return f"{k:.0f}" if k == int(k) else f"{k:.1f}"


def format_ranges(ranges: Sequence[FreqRange]) -> str:
    """``"16 - 30, 49 - 54"`` in kHz."""
    if not ranges:
        return "-"
    return ", ".join(f"{_khz(r.lo_hz)} - {_khz(r.hi_hz)}" for r in ranges)


_HEADERS = ("Label", "High Freq. Range (kHz)", "Strongest Freq. Component (kHz)", "Strongest Relative PSD Value")


def format_table(rows: Sequence[ProfileRow], prominence_factor: float = PROMINENCE) -> str:
    """Aligned plain-text table, one row per summary."""
    body = [
        (
            r.label,
            format_ranges(r.summary.ranges),
            _khz(r.summary.strongest_freq_hz) if r.summary.has_signal else "-",
            f"{r.summary.strongest_psd:.3g}",
        )
        for r in rows
    ]
    widths = [max(len(h), *(len(line[i]) for line in body)) for i, h in enumerate(_HEADERS)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(_HEADERS, widths)).rstrip()]
    for line in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip())
    for r in rows:
        if not r.summary.has_signal:
            lines.append(f"note: {r.label}: no signal above {prominence_factor:g}x noise floor "
                         f"({r.summary.noise_floor:.3g})")
    return "\n".join(lines) + "\n"


def rows_to_json(rows: Sequence[ProfileRow]) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=2)
