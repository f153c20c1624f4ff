"""Segment-power EV detector.

Pipeline: bandpass 16-60 kHz, mean-square power per 0.5 ms segment,
strict threshold at 3e-4, a 5-of-1000 sliding vote, then merging of
detections closer than 2.5 s.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from . import kernels
from .audio_io import AudioClip
from .errors import EmptyInput, InvalidConfig, SegmentTooShort
from .filterbank import FirFilter, apply_filter
from .spectral import fmt_number


@dataclass(frozen=True)
class DetectorConfig:
    segment_ms: float = 0.5
    threshold: float = 3e-4
    votes_required: int = 5
    vote_window: int = 1000
    merge_gap_s: float = 2.5

    def __post_init__(self):
        if not self.segment_ms > 0:
            raise InvalidConfig(f"segment_ms must be > 0, got {self.segment_ms}")
        if not self.threshold > 0:
            raise InvalidConfig(f"threshold must be > 0, got {self.threshold}")
        if not 1 <= self.votes_required <= self.vote_window:
            raise InvalidConfig(
                f"need 1 <= votes_required <= vote_window, got {self.votes_required}/{self.vote_window}"
            )
        if not self.merge_gap_s >= 0:
            raise InvalidConfig(f"merge_gap_s must be >= 0, got {self.merge_gap_s}")


@dataclass(frozen=True)
class SegmentPowerSeries:
    powers: np.ndarray
    segment_duration_s: float
    start_time_s: float = 0.0
    samples_per_segment: int = 0

    def segment_starts_s(self) -> np.ndarray:
        return self.start_time_s + np.arange(self.powers.shape[0]) * self.segment_duration_s


@dataclass(frozen=True, order=True)
class DetectionEvent:
    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ValueError(f"event must have start < end, got [{self.start_s}, {self.end_s}]")

    def covers(self, t: float) -> bool:
        return self.start_s <= t <= self.end_s

    def to_dict(self) -> dict:
        return {"start_s": self.start_s, "end_s": self.end_s}


def segment_samples(segment_ms: float, fs: float) -> int:
    return int(round(segment_ms * fs / 1000.0))


def segment_power(clip: AudioClip, segment_ms: float = 0.5, start_time_s: float = 0.0) -> SegmentPowerSeries:
    """Mean square of each consecutive ``round(segment_ms*fs/1000)``-sample block.

    The trailing partial block is dropped.
    """
    if len(clip) == 0:
        raise EmptyInput("clip has no samples")
    n = segment_samples(segment_ms, clip.sample_rate_hz)
    if n < 1:
        raise SegmentTooShort(f"{segment_ms} ms is less than one sample at {clip.sample_rate_hz} Hz")
    powers = kernels.block_mean_square(np.ascontiguousarray(clip.samples), n)
    return SegmentPowerSeries(powers, n / clip.sample_rate_hz, start_time_s, n)


def threshold_decisions(series: SegmentPowerSeries, threshold: float = 3e-4) -> np.ndarray:
    if not threshold > 0:
        raise InvalidConfig(f"threshold must be > 0, got {threshold}")
    return np.asarray(series.powers) > threshold


def merge_events(events: Sequence[DetectionEvent], merge_gap_s: float) -> list[DetectionEvent]:
    """Combine sorted events whose gap is at most ``merge_gap_s``."""
    merged: list[DetectionEvent] = []
    for ev in sorted(events):
        if merged and ev.start_s - merged[-1].end_s <= merge_gap_s:
            last = merged.pop()
            ev = DetectionEvent(last.start_s, max(last.end_s, ev.end_s))
        merged.append(ev)
    return merged


def detect_events(
    decisions,
    config: DetectorConfig = DetectorConfig(),
    segment_duration_s: float | None = None,
    start_time_s: float = 0.0,
) -> list[DetectionEvent]:
    """Apply the k-of-W vote and merge rule to per-segment decisions.

    A segment is active when some window of ``vote_window`` consecutive
    segments containing it has at least ``votes_required`` true decisions.
    Each maximal run of active segments spans from the start of its first
    segment to the end of its last; runs separated by at most
    ``merge_gap_s`` are then merged.
    """
    d = np.asarray(decisions, dtype=bool)
    if d.ndim != 1 or d.shape[0] == 0:
        raise EmptyInput("decisions must be a non-empty 1-D sequence")
    dur = config.segment_ms / 1000.0 if segment_duration_s is None else segment_duration_s

    active = kernels.vote_activity(d.view(np.uint8), config.votes_required, config.vote_window)
    starts, ends = kernels.true_runs(active)
    raw = [
        DetectionEvent(float(start_time_s + a * dur), float(start_time_s + (b + 1) * dur))
        for a, b in zip(starts.tolist(), ends.tolist())
    ]
    return merge_events(raw, config.merge_gap_s)


def run_detector(clip: AudioClip, filt: FirFilter, config: DetectorConfig = DetectorConfig()):
    """Full pipeline; event times are on the input clip's timeline."""
    return analyze(clip, filt, config).events


@dataclass(frozen=True)
class DetectionResult:
    series: SegmentPowerSeries
    decisions: np.ndarray
    events: list[DetectionEvent]


def analyze(clip: AudioClip, filt: FirFilter, config: DetectorConfig = DetectorConfig()) -> DetectionResult:
    """Like ``run_detector`` but also returns the intermediate traces."""
    filtered = apply_filter(filt, clip)
    series = segment_power(filtered, config.segment_ms, start_time_s=filt.delay_s)
    if series.powers.shape[0] == 0:
        raise SegmentTooShort("filtered clip is shorter than one segment")
    decisions = threshold_decisions(series, config.threshold)
    events = detect_events(decisions, config, series.segment_duration_s, series.start_time_s)
    return DetectionResult(series, decisions, events)


# ---------------------------------------------------------------------------
# serialization


def events_to_json(events: Sequence[DetectionEvent]) -> str:
    return json.dumps([ev.to_dict() for ev in events])


def events_from_json(text: str) -> list[DetectionEvent]:
    return [DetectionEvent(float(e["start_s"]), float(e["end_s"])) for e in json.loads(text)]


def write_events_csv(events: Sequence[DetectionEvent], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["start_s", "end_s"])
    for ev in events:
        writer.writerow([fmt_number(ev.start_s), fmt_number(ev.end_s)])


def write_trace_csv(result: DetectionResult, out: TextIO) -> None:
    """Per-segment ``time_s,power,decision`` rows (power and threshold plots)."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["time_s", "power", "decision"])
    for t, p, d in zip(result.series.segment_starts_s(), result.series.powers, result.decisions):
        writer.writerow([fmt_number(t), fmt_number(p), int(d)])
