"""Audio ingestion: WAV reading/writing, segment slicing, rate conversion.

The reader handles the formats that actually occur in clinical speech dumps —
mono PCM (8/16-bit) and IEEE float32 — and rejects everything else loudly.
Sample values are normalized to [-1, 1] full scale. Rate conversion is
windowed-sinc polyphase resampling (Kaiser window, 32 input samples half-width)
so tone frequencies survive the trip exactly; only the filter application is
delegated to `scipy.signal.upfirdn`.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import upfirdn
from scipy.signal.windows import kaiser

DEFAULT_RATE = 16000

_SINC_HALF_WIDTH = 32  # input samples on each side of the filter center
_KAISER_BETA = 8.6


class AudioError(ValueError):
    """Malformed or unsupported audio input."""


@dataclass
class AudioBuffer:
    """Mono audio: float64 samples normalized to [-1, 1] nominal, plus rate."""

    samples: np.ndarray
    rate: int
    path: str = field(default="", compare=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise AudioError(f"expected 1-D samples, got shape {self.samples.shape}")
        if self.samples.size == 0:
            raise AudioError("zero-length audio")
        if self.rate <= 0:
            raise AudioError(f"non-positive sample rate: {self.rate}")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.rate


def _parse_wav(data: bytes, path: str):
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioError(f"{path}: malformed RIFF header")
    fmt = None
    body = None
    off = 12
    while off + 8 <= len(data):
        ckid = data[off:off + 4]
        (size,) = struct.unpack_from("<I", data, off + 4)
        start = off + 8
        if ckid == b"fmt ":
            if size < 16:
                raise AudioError(f"{path}: truncated fmt chunk")
            tag, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", data, start)
            if tag == 0xFFFE and size >= 40:
                # WAVE_FORMAT_EXTENSIBLE: real tag is the first word of the GUID
                (tag,) = struct.unpack_from("<H", data, start + 24)
            fmt = (tag, channels, rate, bits)
        elif ckid == b"data":
            if start + size > len(data):
                raise AudioError(f"{path}: truncated data chunk")
            body = data[start:start + size]
        off = start + size + (size & 1)
    if fmt is None:
        raise AudioError(f"{path}: missing fmt chunk")
    if body is None:
        raise AudioError(f"{path}: missing data chunk")
    return fmt, body


def _decode_samples(tag: int, bits: int, body: bytes, path: str) -> np.ndarray:
    if tag == 1 and bits == 16:
        return np.frombuffer(body[:len(body) // 2 * 2], dtype="<i2").astype(np.float64) / 32768.0
    if tag == 1 and bits == 8:
        return (np.frombuffer(body, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    if tag == 3 and bits == 32:
        return np.frombuffer(body[:len(body) // 4 * 4], dtype="<f4").astype(np.float64)
    if tag not in (1, 3):
        raise AudioError(f"{path}: unsupported WAV encoding: format tag {tag}")
    raise AudioError(f"{path}: unsupported bit depth {bits} for format tag {tag}")


def load_audio(path: str, target_rate: int | None = None) -> AudioBuffer:
    """Read a mono WAV file, normalize to [-1, 1], optionally resample.

    Accepts PCM 8/16-bit (format tag 1) and IEEE float32 (tag 3); anything
    else — including multi-channel audio — raises AudioError with the
    offending property named.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    (tag, channels, rate, bits), body = _parse_wav(data, str(path))
    if channels != 1:
        raise AudioError(f"{path}: multi-channel unsupported (got {channels} channels)")
    samples = _decode_samples(tag, bits, body, str(path))
    if samples.size == 0:
        raise AudioError(f"{path}: zero-length audio")
    if target_rate is not None and target_rate != rate:
        samples = resample(samples, rate, target_rate)
        rate = target_rate
    return AudioBuffer(samples=samples, rate=int(rate), path=str(path))


def write_wav(path: str, samples: np.ndarray, rate: int) -> None:
    """Write mono 16-bit PCM. Values are clipped to [-1, 1] before scaling."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(x * 32767.0).astype("<i2")
    body = pcm.tobytes()
    hdr = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(body), b"WAVE",
        b"fmt ", 16, 1, 1, rate, rate * 2, 2, 16,
        b"data", len(body),
    )
    with open(path, "wb") as fh:
        fh.write(hdr)
        fh.write(body)


def slice_segment(buf: AudioBuffer, start_s: float, dur_s: float) -> np.ndarray:
    """Cut [start_s, start_s + dur_s) out of a buffer, by rounded sample index.

    A segment end that overshoots the buffer by at most one sample (timestamp
    rounding in segmentation files) is clamped; anything worse is an error.
    """
    if dur_s <= 0:
        raise AudioError(f"non-positive duration: {dur_s}")
    n = buf.samples.size
    i0 = int(round(start_s * buf.rate))
    i1 = int(round((start_s + dur_s) * buf.rate))
    if i0 < 0:
        raise AudioError(f"negative segment start: {start_s}")
    if i1 > n:
        if i1 - n <= 1:
            i1 = n
        else:
            raise AudioError(
                f"span exceeds buffer: [{start_s:.3f}, {start_s + dur_s:.3f}]s "
                f"in {n / buf.rate:.3f}s of audio"
            )
    if i1 <= i0:
        raise AudioError(f"empty segment at {start_s}s (duration {dur_s}s)")
    return buf.samples[i0:i1].copy()


def _design_lowpass(up: int, down: int) -> np.ndarray:
    """Symmetric windowed-sinc lowpass for a rate change of up/down, at the
    upsampled rate. Odd length => integer group delay of 32 input samples."""
    half = _SINC_HALF_WIDTH * up
    n_taps = 2 * half + 1
    # passband edge at the narrower of the two Nyquists, in upsampled units
    fc = 0.5 / max(up, down)
    t = np.arange(n_taps) - half
    h = 2.0 * fc * np.sinc(2.0 * fc * t)
    h *= kaiser(n_taps, _KAISER_BETA)
    h *= up / h.sum()
    return h


def resample(samples: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    """Polyphase resample from src_rate to dst_rate.

    Output length is round(n * dst_rate / src_rate). Equal rates pass the
    input through unchanged.
    """
    if src_rate <= 0 or dst_rate <= 0:
        raise AudioError(f"non-positive rate in conversion {src_rate} -> {dst_rate}")
    x = np.asarray(samples, dtype=np.float64)
    if src_rate == dst_rate:
        return x
    g = math.gcd(int(src_rate), int(dst_rate))
    up = int(dst_rate) // g
    down = int(src_rate) // g
    h = _design_lowpass(up, down)
    y = upfirdn(h, x, up=up, down=down)
    n_out = int(round(x.size * dst_rate / src_rate))
    start = int(round(_SINC_HALF_WIDTH * up / down))
    out = y[start:start + n_out]
    if out.size < n_out:
        out = np.concatenate([out, np.zeros(n_out - out.size)])
    return out
