"""Per-frame mel-cepstra and F0 tracks for the audio metrics."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.fft import dct

from . import CANONICAL_RATE
from .audio_io import Waveform
from .errors import EmptyInputError

UNVOICED = 0.0


@dataclass(frozen=True)
class FrameConfig:
    frame_length: int = 1024
    hop_length: int = 256
    fft_size: int = 1024
    mel_bands: int = 80
    cepstral_order: int = 24
    f0_floor: float = 70.0
    f0_ceil: float = 400.0
    voicing_threshold: float = 0.45
    log_floor: float = 1e-10

    def __post_init__(self):
        if not 0 < self.frame_length <= self.fft_size:
            raise ValueError("need 0 < frame_length <= fft_size")
        if self.hop_length <= 0:
            raise ValueError("hop_length must be positive")
        if self.mel_bands < self.cepstral_order + 1:
            raise ValueError("mel_bands must be at least cepstral_order + 1")
        if not 0 < self.f0_floor < self.f0_ceil:
            raise ValueError("need 0 < f0_floor < f0_ceil")
        if not 0 < self.voicing_threshold < 1:
            raise ValueError("voicing_threshold must lie in (0, 1)")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")


@dataclass(frozen=True, eq=False)
class MelCepstraSequence:
    """``frames`` has shape (n_frames, cepstral_order + 1)."""

    frames: np.ndarray
    hop_seconds: float

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2:
            raise ValueError(f"expected 2-D frames, got shape {frames.shape}")
        if not np.all(np.isfinite(frames)):
            raise ValueError("mel-cepstra contain non-finite values")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def order(self) -> int:
        return self.frames.shape[1] - 1


@dataclass(frozen=True, eq=False)
class PitchTrack:
    """Per-frame F0 in Hz; unvoiced frames hold ``UNVOICED`` (0.0)."""

    f0: np.ndarray
    hop_seconds: float

    def __post_init__(self):
        object.__setattr__(self, "f0", np.asarray(self.f0, dtype=np.float64))

    def __len__(self) -> int:
        return self.f0.shape[0]

    @property
    def voiced(self) -> np.ndarray:
        return self.f0 > 0.0


def frame_count(n_samples: int, frame_length: int, hop_length: int) -> int:
    if n_samples < frame_length:
        return 0
    return (n_samples - frame_length) // hop_length + 1


def _frames(w: Waveform, cfg: FrameConfig) -> np.ndarray:
    if w.sample_rate != CANONICAL_RATE:
        raise ValueError(f"expected {CANONICAL_RATE} Hz input, got {w.sample_rate}; resample first")
    n = frame_count(len(w), cfg.frame_length, cfg.hop_length)
    if n == 0:
        raise EmptyInputError(
            f"waveform of {len(w)} samples is shorter than one {cfg.frame_length}-sample frame"
        )
    view = np.lib.stride_tricks.sliding_window_view(w.samples, cfg.frame_length)
    return view[:: cfg.hop_length][:n]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_bands: int, fft_size: int, sample_rate: int) -> np.ndarray:
    """Triangular HTK-mel filterbank, shape (n_bands, fft_size // 2 + 1), spanning 0..Nyquist."""
    edges_hz = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_bands + 2))
    bin_hz = np.arange(fft_size // 2 + 1) * sample_rate / fft_size
    lower, centre, upper = edges_hz[:-2, None], edges_hz[1:-1, None], edges_hz[2:, None]
    rising = (bin_hz - lower) / (centre - lower)
    falling = (upper - bin_hz) / (upper - centre)
    return np.maximum(0.0, np.minimum(rising, falling))


def mel_cepstra(w: Waveform, cfg: FrameConfig = FrameConfig()) -> MelCepstraSequence:
    """Hann window -> |rFFT| -> mel filterbank -> ln(max(x, floor)) -> orthonormal DCT-II.

    Keeps coefficients 0..cepstral_order. Frames are not centre-padded, so a
    waveform of N samples yields floor((N - frame_length) / hop) + 1 frames.
    """
    frames = _frames(w, cfg)
    window = np.hanning(cfg.frame_length + 1)[:-1]  # periodic Hann
    spectrum = np.abs(np.fft.rfft(frames * window, n=cfg.fft_size, axis=1))
    mel = spectrum @ mel_filterbank(cfg.mel_bands, cfg.fft_size, w.sample_rate).T
    log_mel = np.log(np.maximum(mel, cfg.log_floor))
    ceps = dct(log_mel, type=2, norm="ortho", axis=1)[:, : cfg.cepstral_order + 1]
    return MelCepstraSequence(ceps, cfg.hop_length / w.sample_rate)


def _normalized_autocorrelation(frame: np.ndarray, min_lag: int, max_lag: int) -> np.ndarray:
    """r(tau) = sum x[n]x[n+tau] / sqrt(sum x[n]^2 * sum x[n+tau]^2) for tau in [min_lag, max_lag]."""
    n = frame.shape[0]
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(frame, nfft)
    acf = np.fft.irfft(spec * np.conj(spec), nfft)[: max_lag + 1]
    energy = np.concatenate([[0.0], np.cumsum(frame * frame)])
    lags = np.arange(min_lag, max_lag + 1)
    head = energy[n - lags]                  # sum of x[0 .. n-tau-1]^2
    tail = energy[n] - energy[lags]          # sum of x[tau .. n-1]^2
    denom = np.sqrt(head * tail)
    out = np.zeros(lags.shape[0])
    ok = denom > 1e-12 * max(energy[n], 1e-300)
    out[ok] = acf[lags[ok]] / denom[ok]
    return out


def estimate_f0(w: Waveform, cfg: FrameConfig = FrameConfig()) -> PitchTrack:
    """Normalized-autocorrelation pitch tracker with parabolic peak refinement.

    The candidate lag is the shortest local maximum reaching 90% of the best
    correlation in range, which suppresses octave-down errors on periodic
    input. Frames whose best correlation falls below ``voicing_threshold`` or
    whose refined F0 leaves [f0_floor, f0_ceil] are unvoiced.
    """
    frames = _frames(w, cfg)
    sr = w.sample_rate
    min_lag = max(1, int(np.floor(sr / cfg.f0_ceil)))
    max_lag = min(cfg.frame_length - 2, int(np.ceil(sr / cfg.f0_floor)))
    f0 = np.full(frames.shape[0], UNVOICED)
    for k, frame in enumerate(frames):
        frame = frame - frame.mean()
        r = _normalized_autocorrelation(frame, min_lag, max_lag)
        best = r.max()
        if best < cfg.voicing_threshold:
            continue
        interior = np.flatnonzero((r[1:-1] >= r[:-2]) & (r[1:-1] >= r[2:]) & (r[1:-1] >= 0.9 * best)) + 1
        idx = int(interior[0]) if interior.size else int(np.argmax(r))
        shift = 0.0
        if 0 < idx < r.shape[0] - 1:
            a, b, c = r[idx - 1], r[idx], r[idx + 1]
            curvature = a - 2.0 * b + c
            if curvature < 0:
                shift = 0.5 * (a - c) / curvature
        freq = sr / (min_lag + idx + shift)
        if cfg.f0_floor <= freq <= cfg.f0_ceil:
            f0[k] = freq
    return PitchTrack(f0, cfg.hop_length / sr)


def dump_features_csv(path: str | Path, ceps: MelCepstraSequence, pitch: PitchTrack | None = None) -> None:
    """One frame per row: frame, time_s, [f0,] c0..cM."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["frame", "time_s"] + (["f0"] if pitch is not None else [])
        header += [f"c{i}" for i in range(ceps.order + 1)]
        writer.writerow(header)
        for i, row in enumerate(ceps.frames):
            out = [i, repr(i * ceps.hop_seconds)]
            if pitch is not None:
                out.append(repr(float(pitch.f0[i])) if i < len(pitch) else "")
            writer.writerow(out + [repr(float(v)) for v in row])
