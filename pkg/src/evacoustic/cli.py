"""Command-line interface.

Exit codes: 0 success, 1 unreadable or unusable input, 2 invalid flags,
10 with ``detect --exit-code-on-detect`` when at least one event was found.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from . import __version__
from .audio_io import read_wav, write_wav
from .detector import DetectorConfig, analyze, events_to_json, write_events_csv, write_trace_csv
from .errors import (
    EvAcousticError,
    InvalidBand,
    InvalidConfig,
    InvalidFftSize,
    InvalidHop,
    InvalidLength,
    InvalidOrder,
    InvalidOverlap,
    UnknownProfile,
)
from .filterbank import design_bandpass
from .report import compare_profiles, format_table, rows_to_json, summarize_bands
from .spectral import WINDOW_KINDS, WindowSpec, fmt_number, stft_spectrogram, welch_psd, write_psd_csv, write_spectrogram_csv
from .synth import (
    CircleScenario,
    PassByScenario,
    StaticScenario,
    get_profile,
    profile_names,
    render_scene,
    scenario_from_dict,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FLAGS = 2
EXIT_DETECTED = 10
MIN_ANALYSIS_FS = 120_000


class FlagError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str, fs_check: bool):
    clip = read_wav(path)
    if clip.sample_rate_hz < MIN_ANALYSIS_FS:
        msg = (
            f"{path}: sample rate {clip.sample_rate_hz} Hz puts Nyquist below 60 kHz; "
            "the upper analysis band is not observable"
        )
        if fs_check:
            raise EvAcousticError(msg)
        print(f"warning: {msg}", file=sys.stderr)
    return clip


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return value

    return parse


def _overlap(text):
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"overlap must be in [0, 1), got {text}")
    return value


def _fft_size(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"fft size must be >= 2, got {text}")
    return value


# ---------------------------------------------------------------------------
# subcommands


def cmd_detect(args) -> int:
    if args.flo >= args.fhi:
        raise FlagError("--flo must be below --fhi")
    try:
        config = DetectorConfig(args.segment_ms, args.threshold, args.votes, args.window, args.merge_gap)
    except InvalidConfig as exc:
        raise FlagError(str(exc)) from exc
    clip = _load(args.input, args.fs_check)
    try:
        filt = design_bandpass(args.flo, args.fhi, args.order, clip.sample_rate_hz, args.filter_window)
    except (InvalidBand, InvalidOrder) as exc:
        raise FlagError(str(exc)) from exc
    result = analyze(clip, filt, config)

    if args.format == "csv":
        buf = io.StringIO()
        write_events_csv(result.events, buf)
        text = buf.getvalue()
    else:
        text = events_to_json(result.events) + "\n"
    _emit(text, args.out)
    if args.trace_out:
        buf = io.StringIO()
        write_trace_csv(result, buf)
        Path(args.trace_out).write_text(buf.getvalue())
    if args.exit_code_on_detect and result.events:
        return EXIT_DETECTED
    return EXIT_OK


def cmd_psd(args) -> int:
    clip = _load(args.input, args.fs_check)
    psd = welch_psd(clip, args.fft, args.overlap, WindowSpec(args.window_kind, args.fft))
    if args.flo is not None or args.fhi is not None:
        psd = psd.crop(args.flo or 0.0, args.fhi if args.fhi is not None else float("inf"))
    if args.format == "json":
        text = json.dumps({
            "resolution_hz": psd.resolution_hz,
            "n_segments": psd.n_segments,
            "freqs_hz": psd.bin_freqs_hz.tolist(),
            "psd": psd.psd.tolist(),
        }) + "\n"
    else:
        buf = io.StringIO()
        write_psd_csv(psd, buf)
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def cmd_spectrogram(args) -> int:
    clip = _load(args.input, args.fs_check)
    hop = args.hop if args.hop is not None else args.fft // 2
    spec = stft_spectrogram(clip, args.fft, hop, WindowSpec(args.window_kind, args.fft))
    buf = io.StringIO()
    write_spectrogram_csv(spec, buf, args.flo, args.fhi)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _scenario(args):
    if args.scenario_json:
        return scenario_from_dict(json.loads(Path(args.scenario_json).read_text()))
    speed = args.speed_kmh / 3.6 if args.speed_kmh is not None else None
    if args.scenario == "circle":
        kw = {"radius_m": args.radius, "min_distance_m": args.min_distance, "revolutions": args.revolutions}
        if speed:
            kw["speed_mps"] = speed
        return CircleScenario(**kw)
    if args.scenario == "pass_by":
        kw = {"start_distance_m": args.start_distance, "closest_m": args.closest, "accel_mps2": args.accel}
        if speed:
            kw["speed_mps"] = speed
        return PassByScenario(**kw)
    return StaticScenario(args.distance, args.duration)


def cmd_synth(args) -> int:
    try:
        profile = get_profile(args.profile)
    except UnknownProfile as exc:
        raise FlagError(f"unknown profile {args.profile!r}; valid profiles: {', '.join(profile_names())}") from exc
    if not args.out:
        raise FlagError("--out is required")
    try:
        traj = _scenario(args)
    except (ValueError, TypeError) as exc:
        raise FlagError(f"invalid scenario: {exc}") from exc
    try:
        clip = render_scene(profile, traj, args.fs, args.amplitude, args.noise, args.doppler, args.seed)
    except EvAcousticError as exc:
        raise FlagError(str(exc)) from exc
    write_wav(clip, args.out, args.bit_depth)
    print(f"wrote {args.out}: {profile.name}, {traj.kind}, {fmt_number(clip.duration_s)} s", file=sys.stderr)
    return EXIT_OK


def cmd_summarize(args) -> int:
    if args.analysis_lo >= args.analysis_hi:
        raise FlagError("--analysis-lo must be below --analysis-hi")
    if not args.prominence > 1:
        raise FlagError("--prominence must be > 1")
    summaries = []
    for path in args.inputs:
        clip = _load(path, args.fs_check)
        psd = welch_psd(clip, args.fft, args.overlap, WindowSpec(args.window_kind, args.fft))
        summaries.append((Path(path).stem, summarize_bands(psd, args.analysis_lo, args.analysis_hi, args.prominence)))
    rows = compare_profiles(summaries)
    if args.format == "json":
        text = rows_to_json(rows) + "\n"
    else:
        text = format_table(rows, args.prominence)
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p, formats, default_format):
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=formats, default=default_format)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (only synth draws random numbers)")
    p.add_argument("--fs-check", action="store_true",
                   help="fail instead of warning when the input sample rate is below 120 kHz")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evacoustic", description="Ultrasonic EV/HEV acoustic detection toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the segment-power detector on a WAV file")
    p.add_argument("input")
    _common(p, ("json", "csv"), "json")
    p.add_argument("--flo", type=_positive(float), default=16_000.0)
    p.add_argument("--fhi", type=_positive(float), default=60_000.0)
    p.add_argument("--order", type=int, default=512)
    p.add_argument("--filter-window", choices=WINDOW_KINDS, default="hann")
    p.add_argument("--segment-ms", type=_positive(float), default=0.5)
    p.add_argument("--threshold", type=_positive(float), default=3e-4)
    p.add_argument("--votes", type=int, default=5)
    p.add_argument("--window", type=int, default=1000, help="vote window length in segments")
    p.add_argument("--merge-gap", type=float, default=2.5)
    p.add_argument("--trace-out", help="CSV of per-segment power and threshold decisions")
    p.add_argument("--exit-code-on-detect", action="store_true", help="exit 10 when any event is detected")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("psd", help="Welch PSD as CSV")
    p.add_argument("input")
    _common(p, ("csv", "json"), "csv")
    p.add_argument("--fft", type=_fft_size, default=16384)
    p.add_argument("--overlap", type=_overlap, default=0.5)
    p.add_argument("--window-kind", choices=WINDOW_KINDS, default="hann")
    p.add_argument("--flo", type=float, default=None, help="crop output below this frequency")
    p.add_argument("--fhi", type=float, default=None, help="crop output above this frequency")
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("spectrogram", help="STFT spectrogram (dB) as CSV")
    p.add_argument("input")
    _common(p, ("csv",), "csv")
    p.add_argument("--fft", type=_fft_size, default=2048)
    p.add_argument("--hop", type=_positive(int), default=None, help="default: fft/2")
    p.add_argument("--window-kind", choices=WINDOW_KINDS, default="hann")
    p.add_argument("--flo", type=float, default=None)
    p.add_argument("--fhi", type=float, default=None)
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("synth", help="render a synthetic drive-by scene to WAV")
    p.add_argument("--profile", default="nissan", help=f"builtin ({', '.join(profile_names())}) or a JSON file")
    p.add_argument("--scenario", choices=("circle", "pass_by", "static"), default="circle")
    p.add_argument("--scenario-json", help="scenario JSON file (overrides --scenario and its flags)")
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--min-distance", type=float, default=1.0)
    p.add_argument("--revolutions", type=float, default=2.0)
    p.add_argument("--start-distance", type=float, default=15.0)
    p.add_argument("--closest", type=float, default=1.5)
    p.add_argument("--accel", type=float, default=None, help="accelerating pass-by from standstill (m/s^2)")
    p.add_argument("--speed-kmh", type=float, default=None, help="default 15 km/h")
    p.add_argument("--distance", type=float, default=1.0, help="static scenario distance (m)")
    p.add_argument("--duration", type=float, default=2.0, help="static scenario duration (s)")
    p.add_argument("--amplitude", type=float, default=0.1, help="tone amplitude at 1 m for relative amplitude 1")
    p.add_argument("--noise", type=float, default=0.05, help="background noise RMS")
    p.add_argument("--doppler", action="store_true")
    p.add_argument("--fs", type=_positive(int), default=192_000)
    p.add_argument("--bit-depth", type=int, choices=(16, 24), default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output WAV path (required)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("summarize", help="PSD band summary of one or more WAV files")
    p.add_argument("inputs", nargs="+")
    _common(p, ("text", "json"), "text")
    p.add_argument("--fft", type=_fft_size, default=16384)
    p.add_argument("--overlap", type=_overlap, default=0.5)
    p.add_argument("--window-kind", choices=WINDOW_KINDS, default="hann")
    p.add_argument("--analysis-lo", type=float, default=15_000.0)
    p.add_argument("--analysis-hi", type=float, default=60_000.0)
    p.add_argument("--prominence", type=float, default=10.0)
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FlagError, InvalidFftSize, InvalidHop, InvalidOverlap, InvalidLength) as exc:
        parser.error(str(exc))  # exits with status 2
    except (EvAcousticError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
