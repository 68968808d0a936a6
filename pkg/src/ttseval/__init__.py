"""Batch evaluation toolkit for text-to-speech systems.

Audio metrics (DTW-aligned mel-cepstral distortion, log-F0 RMSE), transcript
metrics (CER, WER, corpus BLEU), a vocoder-discriminator quality score, corpus
split management, MOS aggregation and report emission.
"""

__version__ = "0.1.0"

CANONICAL_RATE = 22050
