import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.io import wavfile

from evacoustic.audio_io import AudioClip, read_wav, slice_clip, write_wav
from evacoustic.errors import EmptyAudio, MalformedContainer, RangeError, UnsupportedEncoding


def _riff(fmt_body: bytes, data: bytes, extra_chunks=()) -> bytes:
    chunks = [b"fmt " + struct.pack("<I", len(fmt_body)) + fmt_body]
    for ident, body in extra_chunks:
        pad = b"\x00" if len(body) & 1 else b""
        chunks.append(ident + struct.pack("<I", len(body)) + body + pad)
    pad = b"\x00" if len(data) & 1 else b""
    chunks.append(b"data" + struct.pack("<I", len(data)) + data + pad)
    payload = b"WAVE" + b"".join(chunks)
    return b"RIFF" + struct.pack("<I", len(payload)) + payload


def _fmt(tag, channels, rate, bits):
    block = channels * bits // 8
    return struct.pack("<HHIIHH", tag, channels, rate, rate * block, block, bits)


def test_read_16bit_normalization(tmp_path):
    path = tmp_path / "a.wav"
    path.write_bytes(_riff(_fmt(1, 1, 192_000, 16), np.array([0, 16384, -32768], "<i2").tobytes()))
    clip = read_wav(path)
    assert clip.sample_rate_hz == 192_000
    np.testing.assert_array_equal(clip.samples, [0.0, 0.5, -1.0])


def test_read_stereo_is_averaged(tmp_path):
    path = tmp_path / "s.wav"
    path.write_bytes(_riff(_fmt(1, 2, 48_000, 16), np.array([16384, 0], "<i2").tobytes()))
    # channel values 0.5 and 0.0 -> 0.25
    np.testing.assert_array_equal(read_wav(path).samples, [0.25])


def test_read_stereo_float_average(tmp_path):
    path = tmp_path / "f.wav"
    path.write_bytes(_riff(_fmt(3, 2, 48_000, 32), np.array([1.0, 0.0], "<f4").tobytes()))
    np.testing.assert_array_equal(read_wav(path).samples, [0.5])


def test_read_24bit(tmp_path):
    ints = np.array([0, 4194304, -8388608, 8388607, -1])
    raw = b"".join(int(v & 0xFFFFFF).to_bytes(3, "little") for v in ints)
    path = tmp_path / "b.wav"
    path.write_bytes(_riff(_fmt(1, 1, 192_000, 24), raw))
    np.testing.assert_array_equal(read_wav(path).samples, ints / 8388608.0)


def test_float_input_is_clamped(tmp_path):
    path = tmp_path / "c.wav"
    path.write_bytes(_riff(_fmt(3, 1, 96_000, 32), np.array([1.5, -2.0, 0.25], "<f4").tobytes()))
    np.testing.assert_array_equal(read_wav(path).samples, [1.0, -1.0, 0.25])


def test_extra_chunks_are_skipped(tmp_path):
    path = tmp_path / "d.wav"
    extras = [(b"LIST", b"INFOISFT\x05\x00\x00\x00abcd\x00"), (b"fact", struct.pack("<I", 3))]
    path.write_bytes(_riff(_fmt(1, 1, 192_000, 16), np.array([1, 2, 3], "<i2").tobytes(), extras))
    np.testing.assert_array_equal(read_wav(path).samples, np.array([1, 2, 3]) / 32768.0)


def test_extensible_pcm(tmp_path):
    guid_pcm = struct.pack("<H", 1) + b"\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"
    body = _fmt(0xFFFE, 1, 192_000, 16) + struct.pack("<HHI", 22, 16, 4) + guid_pcm
    path = tmp_path / "e.wav"
    path.write_bytes(_riff(body, np.array([16384], "<i2").tobytes()))
    np.testing.assert_array_equal(read_wav(path).samples, [0.5])


def test_matches_scipy_reader(tmp_path, rng):
    ints = rng.integers(-32768, 32767, size=5000, dtype=np.int16)
    path = tmp_path / "ref.wav"
    wavfile.write(path, 192_000, ints)
    fs, ref = wavfile.read(path)
    clip = read_wav(path)
    assert clip.sample_rate_hz == fs
    np.testing.assert_array_equal(clip.samples, ref / 32768.0)


@pytest.mark.parametrize(
    "blob, exc",
    [
        (b"not a wave file at all", MalformedContainer),
        (b"RIFF\x04\x00\x00\x00WAVX", MalformedContainer),
        (_riff(_fmt(7, 1, 8000, 8), b"\x00\x01"), UnsupportedEncoding),  # mu-law
        (_riff(_fmt(1, 1, 8000, 8), b"\x00\x01"), UnsupportedEncoding),
        (_riff(_fmt(1, 1, 192_000, 16), b""), EmptyAudio),
    ],
)
def test_read_errors(tmp_path, blob, exc):
    path = tmp_path / "bad.wav"
    path.write_bytes(blob)
    with pytest.raises(exc):
        read_wav(path)


def test_missing_data_chunk(tmp_path):
    body = _fmt(1, 1, 8000, 16)
    payload = b"WAVE" + b"fmt " + struct.pack("<I", len(body)) + body
    path = tmp_path / "nodata.wav"
    path.write_bytes(b"RIFF" + struct.pack("<I", len(payload)) + payload)
    with pytest.raises(MalformedContainer):
        read_wav(path)


def test_write_header_and_duration(tmp_path):
    clip = AudioClip(np.zeros(192_000), 192_000)
    path = tmp_path / "w.wav"
    write_wav(clip, path)
    raw = path.read_bytes()
    assert struct.unpack_from("<I", raw, 24)[0] == 192_000
    back = read_wav(path)
    assert len(back) == 192_000 and back.duration_s == 1.0


@pytest.mark.parametrize("bits, top", [(16, 32767), (24, 8388607)])
def test_write_clamps(tmp_path, bits, top):
    path = tmp_path / "clamp.wav"
    write_wav(AudioClip([1.5, -3.0], 8000), path, bits)
    back = read_wav(path)
    scale = 2.0 ** (bits - 1)
    np.testing.assert_array_equal(back.samples, [top / scale, -1.0])


@pytest.mark.parametrize("bits", [16, 24])
def test_round_trip_within_quantization(tmp_path, rng, bits):
    x = rng.uniform(-1, 1, 1000)
    x[:2] = [1.0, -1.0]
    path = tmp_path / "rt.wav"
    write_wav(AudioClip(x, 192_000), path, bits)
    back = read_wav(path)
    assert back.sample_rate_hz == 192_000 and len(back) == 1000
    assert np.max(np.abs(back.samples - x)) <= 2.0 ** -(bits - 1)


def test_odd_length_24bit_pads(tmp_path):
    path = tmp_path / "odd.wav"
    write_wav(AudioClip([0.1], 44_100), path, 24)
    assert len(path.read_bytes()) % 2 == 0
    assert read_wav(path).samples.shape == (1,)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=200))
def test_read_output_always_in_range(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("h") / "x.wav"
    write_wav(AudioClip(values, 16_000), path)
    s = read_wav(path).samples
    assert np.all((s >= -1.0) & (s <= 1.0))


class TestSlice:
    clip = AudioClip(np.arange(192_000, dtype=float) / 192_000, 192_000)

    def test_half(self):
        assert len(slice_clip(self.clip, 0.0, 0.5)) == 96_000

    def test_identity(self):
        out = slice_clip(self.clip, 0.0, self.clip.duration_s)
        np.testing.assert_array_equal(out.samples, self.clip.samples)
        assert out.sample_rate_hz == self.clip.sample_rate_hz

    def test_composition(self):
        a = slice_clip(slice_clip(self.clip, 0.25, 0.75), 0.0, 0.25)
        b = slice_clip(self.clip, 0.25, 0.5)
        np.testing.assert_array_equal(a.samples, b.samples)

    @pytest.mark.parametrize("start, end", [(-0.1, 0.5), (0.5, 0.5), (0.6, 0.5), (0.0, 1.01)])
    def test_bounds(self, start, end):
        with pytest.raises(RangeError):
            slice_clip(self.clip, start, end)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.0, 0.999), st.floats(0.001, 1.0))
    def test_length_formula(self, a, b):
        start, end = min(a, b), max(a, b)
        if end - start < 1e-6:
            return
        out = slice_clip(self.clip, start, end)
        fs = self.clip.sample_rate_hz
        assert len(out) == int(np.floor(end * fs + 1e-7)) - int(np.floor(start * fs + 1e-7))


def test_clip_is_immutable():
    clip = AudioClip([0.0, 0.1], 8000)
    with pytest.raises(ValueError):
        clip.samples[0] = 1.0


@pytest.mark.parametrize("fs", [0, -5, 44_100.5])
def test_clip_rejects_bad_rate(fs):
    with pytest.raises(ValueError):
        AudioClip([0.0], fs)
