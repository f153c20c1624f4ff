"""PCM WAV reading/writing and the ``AudioClip`` container.

Samples are always float64 in full-scale units: integer PCM is divided by
the largest representable magnitude (32768 for 16-bit, 8388608 for 24-bit),
so every power quantity computed downstream is dimensionless.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyAudio, IoFailure, MalformedContainer, RangeError, UnsupportedEncoding

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

_INT_SCALE = {16: 32768.0, 24: 8388608.0, 32: 2147483648.0}


@dataclass(frozen=True)
class AudioClip:
    """Mono, uniformly sampled signal.

    ``samples`` is stored as a read-only float64 array.
    """

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be a positive integer, got {self.sample_rate_hz!r}")
        x = np.array(self.samples, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def scaled(self, gain: float) -> "AudioClip":
        return AudioClip(self.samples * gain, self.sample_rate_hz)


# ---------------------------------------------------------------------------
# reading


def _iter_chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        ident, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            # truncated trailing chunk; keep what is there
            yield ident, body
            return
        yield ident, body
        pos += 8 + size + (size & 1)


def _decode(body: bytes, fmt_tag: int, bits: int, n_channels: int) -> np.ndarray:
    frame_bytes = n_channels * bits // 8
    n_frames = len(body) // frame_bytes
    body = body[: n_frames * frame_bytes]
    if fmt_tag == WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedEncoding(f"{bits}-bit float is not supported")
        x = np.frombuffer(body, dtype="<f4").astype(np.float64)
        x = np.nan_to_num(x, nan=0.0)
        return np.clip(x, -1.0, 1.0).reshape(n_frames, n_channels)
    if bits == 16:
        x = np.frombuffer(body, dtype="<i2").astype(np.float64)
    elif bits == 24:
        raw = np.frombuffer(body, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints = np.where(ints & 0x800000, ints - 0x1000000, ints)
        x = ints.astype(np.float64)
    elif bits == 32:
        x = np.frombuffer(body, dtype="<i4").astype(np.float64)
    else:
        raise UnsupportedEncoding(f"{bits}-bit integer PCM is not supported")
    return (x / _INT_SCALE[bits]).reshape(n_frames, n_channels)


def read_wav(path) -> AudioClip:
    """Read a RIFF/WAVE file and return it as a normalized mono clip.

    Multi-channel input is averaged to mono. Chunks other than ``fmt `` and
    ``data`` (``LIST``, ``fact``, ...) are skipped wherever they appear.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainer(f"{path}: not a RIFF/WAVE file")

    fmt = None
    body = None
    for ident, chunk in _iter_chunks(data):
        if ident == b"fmt ":
            if len(chunk) < 16:
                raise MalformedContainer("fmt chunk too short")
            fmt = chunk
        elif ident == b"data" and body is None:
            body = chunk
    if fmt is None:
        raise MalformedContainer("missing fmt chunk")
    if body is None:
        raise MalformedContainer("missing data chunk")

    fmt_tag, n_channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if fmt_tag == WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise MalformedContainer("extensible fmt chunk too short")
        fmt_tag = struct.unpack_from("<H", fmt, 24)[0]
    if fmt_tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedEncoding(f"format tag 0x{fmt_tag:04x} is not PCM or IEEE float")
    if n_channels < 1 or rate <= 0 or bits == 0 or bits % 8:
        raise MalformedContainer(f"inconsistent fmt chunk: channels={n_channels} rate={rate} bits={bits}")

    frames = _decode(body, fmt_tag, bits, n_channels)
    if frames.shape[0] == 0:
        raise EmptyAudio(f"{path}: no samples")
    mono = frames[:, 0] if n_channels == 1 else frames.mean(axis=1)
    return AudioClip(mono, rate)


# ---------------------------------------------------------------------------
# writing


def quantize(samples: np.ndarray, bit_depth: int) -> np.ndarray:
    """Clamp to [-1, 1] and round to signed integers of ``bit_depth`` bits."""
    if bit_depth not in (16, 24):
        raise ValueError(f"bit_depth must be 16 or 24, got {bit_depth}")
    scale = _INT_SCALE[bit_depth]
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    return np.clip(np.rint(x * scale), -scale, scale - 1).astype(np.int32)


def write_wav(clip: AudioClip, path, bit_depth: int = 16) -> None:
    ints = quantize(clip.samples, bit_depth)
    if bit_depth == 16:
        payload = ints.astype("<i2").tobytes()
    else:
        payload = ints.astype("<i4").view(np.uint8).reshape(-1, 4)[:, :3].tobytes()
    block_align = bit_depth // 8
    fmt = struct.pack(
        "<HHIIHH",
        WAVE_FORMAT_PCM,
        1,
        clip.sample_rate_hz,
        clip.sample_rate_hz * block_align,
        block_align,
        bit_depth,
    )
    pad = b"\x00" if len(payload) & 1 else b""
    riff_size = 4 + (8 + len(fmt)) + (8 + len(payload) + len(pad))
    blob = b"".join(
        [
            struct.pack("<4sI4s", b"RIFF", riff_size, b"WAVE"),
            struct.pack("<4sI", b"fmt ", len(fmt)),
            fmt,
            struct.pack("<4sI", b"data", len(payload)),
            payload,
            pad,
        ]
    )
    try:
        Path(path).write_bytes(blob)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def _floor_index(x: float) -> int:
    # absorb representation error such as (n / fs) * fs == n - 1e-12
    return math.floor(x + 1e-7)


def slice_clip(clip: AudioClip, start_s: float, end_s: float) -> AudioClip:
    """Samples in ``[floor(start_s*fs), floor(end_s*fs))``."""
    if not (0.0 <= start_s < end_s <= clip.duration_s):
        raise RangeError(f"need 0 <= start < end <= {clip.duration_s}, got [{start_s}, {end_s}]")
    fs = clip.sample_rate_hz
    i0 = _floor_index(start_s * fs)
    i1 = _floor_index(end_s * fs)
    return AudioClip(clip.samples[i0:i1], fs)
