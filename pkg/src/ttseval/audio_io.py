"""Decode, resample and trim audio into the canonical internal representation.

WAV parsing is done by hand (RIFF chunk walk + numpy) so that malformed
headers, truncated data chunks and unsupported codecs map onto distinct
errors. Resampling is delegated to :func:`scipy.signal.resample_poly` with a
designed Kaiser-windowed sinc filter.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import firwin, resample_poly

from . import CANONICAL_RATE
from .errors import FormatError, UnsupportedEncodingError

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# taps per polyphase branch of the anti-aliasing filter
RESAMPLE_TAPS = 64
KAISER_BETA = 8.6


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono audio: float64 samples in [-1, 1] at ``sample_rate`` Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"Waveform must be 1-D, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Waveform contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


def _parse_fmt(body: bytes) -> tuple[int, int, int, int]:
    if len(body) < 16:
        raise FormatError("fmt chunk shorter than 16 bytes")
    fmt_tag, channels, rate, _byte_rate, _block_align, bits = struct.unpack("<HHIIHH", body[:16])
    if fmt_tag == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 26:
            raise FormatError("WAVE_FORMAT_EXTENSIBLE fmt chunk too short")
        # first two bytes of the SubFormat GUID carry the actual codec tag
        (fmt_tag,) = struct.unpack("<H", body[24:26])
    return fmt_tag, channels, rate, bits


def _decode(payload: bytes, fmt_tag: int, channels: int, bits: int) -> np.ndarray:
    if fmt_tag == WAVE_FORMAT_PCM and bits == 16:
        data = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    elif fmt_tag == WAVE_FORMAT_PCM and bits == 24:
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        data = ints.astype(np.float64) / float(1 << 23)
    elif fmt_tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(data)):
            raise FormatError("float WAV contains non-finite samples")
        data = np.clip(data, -1.0, 1.0)
    else:
        raise UnsupportedEncodingError(
            f"unsupported encoding: format tag 0x{fmt_tag:04x}, {bits} bits"
        )
    return data.reshape(-1, channels).mean(axis=1)


def read_wav(path: str | Path) -> Waveform:
    """Read a RIFF/WAVE file (PCM16, PCM24 or float32; mono or stereo).

    Stereo is averaged down to mono. Integer PCM is scaled by the type's
    maximum magnitude (32768 or 2**23).

    Raises:
        FormatError: malformed header or truncated data chunk.
        UnsupportedEncodingError: any other codec, bit depth or channel count.
    """
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos:pos + 4]
        (size,) = struct.unpack("<I", blob[pos + 4:pos + 8])
        body_start = pos + 8
        body_end = body_start + size
        if chunk_id == b"fmt ":
            if body_end > len(blob):
                raise FormatError(f"{path}: truncated fmt chunk")
            fmt = _parse_fmt(blob[body_start:body_end])
        elif chunk_id == b"data":
            if fmt is None:
                raise FormatError(f"{path}: data chunk before fmt chunk")
            if body_end > len(blob):
                raise FormatError(
                    f"{path}: data chunk declares {size} bytes, only {len(blob) - body_start} present"
                )
            payload = blob[body_start:body_end]
            break
        pos = body_end + (size & 1)

    if fmt is None:
        raise FormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise FormatError(f"{path}: missing data chunk")

    fmt_tag, channels, rate, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedEncodingError(f"{path}: {channels} channels not supported")
    if rate <= 0:
        raise FormatError(f"{path}: sample rate {rate}")
    if bits % 8 or bits == 0:
        raise UnsupportedEncodingError(f"{path}: {bits}-bit samples not supported")
    frame_bytes = channels * (bits // 8)
    if len(payload) % frame_bytes:
        raise FormatError(f"{path}: data size {len(payload)} not a multiple of frame size {frame_bytes}")
    return Waveform(_decode(payload, fmt_tag, channels, bits), rate)


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write ``w`` as mono 16-bit PCM at its own sample rate."""
    ints = np.clip(np.round(w.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, WAVE_FORMAT_PCM, 1, w.sample_rate, w.sample_rate * 2, 2, 16,
        b"data", len(payload),
    )
    Path(path).write_bytes(header + payload)


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Polyphase resampling with a 64-tap-per-phase Kaiser-windowed sinc."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == w.sample_rate:
        return w
    g = math.gcd(w.sample_rate, target_rate)
    up, down = target_rate // g, w.sample_rate // g
    if len(w) == 0:
        return Waveform(np.zeros(0), target_rate)
    max_rate = max(up, down)
    taps = firwin(RESAMPLE_TAPS * max_rate + 1, 1.0 / max_rate, window=("kaiser", KAISER_BETA))
    out = resample_poly(w.samples, up, down, window=taps)
    return Waveform(np.clip(out, -1.0, 1.0), target_rate)


def to_canonical(w: Waveform) -> Waveform:
    return resample(w, CANONICAL_RATE)


def frame_rms(samples: np.ndarray, frame_len: int, hop: int) -> tuple[np.ndarray, np.ndarray]:
    """RMS of frames starting every ``hop`` samples; the final frames may be partial.

    Returns (starts, rms).
    """
    n = samples.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int), np.zeros(0)
    starts = np.arange(0, max(n - frame_len, 0) + 1, hop)
    if starts[-1] + frame_len < n:
        starts = np.append(starts, np.arange(starts[-1] + hop, n, hop))
    sq = np.concatenate([[0.0], np.cumsum(samples * samples)])
    ends = np.minimum(starts + frame_len, n)
    rms = np.sqrt(np.maximum(sq[ends] - sq[starts], 0.0) / (ends - starts))
    return starts, rms


def trim_silence(
    w: Waveform,
    threshold_db: float = 40.0,
    frame_ms: float = 25.0,
    hop_ms: float = 10.0,
) -> Waveform:
    """Drop leading and trailing frames quieter than ``threshold_db`` below the peak frame RMS.

    Only the edges are cut; the result is a contiguous slice of the input.
    An all-silent waveform is returned unchanged.
    """
    if threshold_db <= 0 or frame_ms <= 0 or hop_ms <= 0:
        raise ValueError("threshold_db, frame_ms and hop_ms must be positive")
    frame_len = max(1, int(round(frame_ms * w.sample_rate / 1000.0)))
    hop = max(1, int(round(hop_ms * w.sample_rate / 1000.0)))
    starts, rms = frame_rms(w.samples, frame_len, hop)
    if rms.size == 0 or rms.max() <= 0.0:
        return w
    active = np.flatnonzero(rms >= rms.max() * 10.0 ** (-threshold_db / 20.0))
    begin = int(starts[active[0]])
    end = int(min(starts[active[-1]] + frame_len, len(w)))
    if begin == 0 and end == len(w):
        return w
    return Waveform(w.samples[begin:end], w.sample_rate)
