"""MCD and log-F0 RMSE between ground-truth and synthesized utterances."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .alignment import AlignmentPath, dtw
from .audio_io import Waveform, to_canonical
from .errors import EmptyInputError, ShapeError
from .features import FrameConfig, MelCepstraSequence, PitchTrack, estimate_f0, mel_cepstra

MCD_CONSTANT = 10.0 * math.sqrt(2.0) / math.log(10.0)


@dataclass(frozen=True)
class UtteranceAudioScores:
    mcd: float
    log_f0_rmse: float | None  # None when no frame pair is voiced in both
    voiced_overlap: int


@dataclass(frozen=True)
class CorpusAggregate:
    mean: float
    std: float
    n: int


def _check_orders(ref: MelCepstraSequence, hyp: MelCepstraSequence) -> None:
    if len(ref) == 0 or len(hyp) == 0:
        raise EmptyInputError("mel-cepstra sequence is empty")
    if ref.order != hyp.order:
        raise ShapeError(f"cepstral order mismatch: {ref.order} vs {hyp.order}")


def align_cepstra(ref: MelCepstraSequence, hyp: MelCepstraSequence) -> AlignmentPath:
    """Euclidean DTW on c1..cM; c0 (loudness) does not drive the warp."""
    _check_orders(ref, hyp)
    return dtw(ref.frames[:, 1:], hyp.frames[:, 1:], "euclidean")


def mcd_along(ref: MelCepstraSequence, hyp: MelCepstraSequence, path: AlignmentPath) -> float:
    diff = ref.frames[path.ref_indices, 1:] - hyp.frames[path.hyp_indices, 1:]
    return MCD_CONSTANT * float(np.mean(np.sqrt(np.sum(diff * diff, axis=1))))


def mcd(ref: MelCepstraSequence, hyp: MelCepstraSequence) -> float:
    """Mel-cepstral distortion in dB, averaged over the DTW path pairs."""
    return mcd_along(ref, hyp, align_cepstra(ref, hyp))


def _check_path(ref: PitchTrack, hyp: PitchTrack, path: AlignmentPath) -> tuple[np.ndarray, np.ndarray]:
    i, j = path.ref_indices, path.hyp_indices
    if i.size and (i.min() < 0 or i.max() >= len(ref) or j.min() < 0 or j.max() >= len(hyp)):
        raise ShapeError(
            f"alignment path indexes outside pitch tracks of length {len(ref)} and {len(hyp)}"
        )
    return i, j


def voiced_overlap(ref: PitchTrack, hyp: PitchTrack, path: AlignmentPath) -> int:
    i, j = _check_path(ref, hyp, path)
    return int(np.count_nonzero(ref.voiced[i] & hyp.voiced[j]))


def log_f0_rmse(ref: PitchTrack, hyp: PitchTrack, path: AlignmentPath) -> float | None:
    """RMSE of ln F0 over path pairs voiced in both tracks, or None if there are none."""
    i, j = _check_path(ref, hyp, path)
    both = ref.voiced[i] & hyp.voiced[j]
    if not both.any():
        return None
    d = np.log(ref.f0[i[both]]) - np.log(hyp.f0[j[both]])
    return float(np.sqrt(np.mean(d * d)))


def score_utterance(ref: Waveform, hyp: Waveform, cfg: FrameConfig = FrameConfig()) -> UtteranceAudioScores:
    """Both metrics for one pair; a single mel-cepstral warp serves MCD and log-F0."""
    ref, hyp = to_canonical(ref), to_canonical(hyp)
    ref_c, hyp_c = mel_cepstra(ref, cfg), mel_cepstra(hyp, cfg)
    path = align_cepstra(ref_c, hyp_c)
    ref_p, hyp_p = estimate_f0(ref, cfg), estimate_f0(hyp, cfg)
    return UtteranceAudioScores(
        mcd=mcd_along(ref_c, hyp_c, path),
        log_f0_rmse=log_f0_rmse(ref_p, hyp_p, path),
        voiced_overlap=voiced_overlap(ref_p, hyp_p, path),
    )


def aggregate(values: Iterable[float], sample_std: bool = False) -> CorpusAggregate:
    """Mean and standard deviation (population by default, n-1 with ``sample_std``)."""
    vals = np.asarray(list(values), dtype=np.float64)
    if vals.size == 0:
        raise EmptyInputError("cannot aggregate an empty sequence")
    mean = math.fsum(vals) / vals.size
    if vals.size == 1:
        return CorpusAggregate(float(mean), 0.0, 1)
    ddof = 1 if sample_std else 0
    var = math.fsum((vals - mean) ** 2) / (vals.size - ddof)
    return CorpusAggregate(float(mean), math.sqrt(var), int(vals.size))


def write_scores_csv(path: str | Path, scores: Sequence[tuple[str, UtteranceAudioScores]]) -> None:
    """utterance_id, mcd, log_f0_rmse, voiced_overlap; absent log-F0 RMSE is an empty cell."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["utterance_id", "mcd", "log_f0_rmse", "voiced_overlap"])
        for utt_id, s in sorted(scores, key=lambda item: item[0]):
            rmse = "" if s.log_f0_rmse is None else repr(s.log_f0_rmse)
            writer.writerow([utt_id, repr(s.mcd), rmse, s.voiced_overlap])
