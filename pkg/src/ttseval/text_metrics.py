"""Transcript normalization, CER/WER via Levenshtein alignment, and corpus BLEU."""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyInputError, FormatError, UndefinedRateError, ValidationError

_EXPLICIT_REMOVALS = str.maketrans("", "", "«»,")


@dataclass(frozen=True)
class EditCounts:
    hits: int = 0
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def ref_length(self) -> int:
        return self.hits + self.substitutions + self.deletions

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.hits + other.hits,
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
        )

    def rate(self) -> float:
        if self.ref_length == 0:
            raise UndefinedRateError("error rate undefined for an empty reference")
        return self.errors / self.ref_length


@dataclass(frozen=True)
class TranscriptPair:
    utterance_id: str
    reference: str
    hypothesis: str

    def __post_init__(self):
        if not self.utterance_id:
            raise ValidationError("transcript pair needs a non-empty utterance_id")


def _collapse(s: str) -> str:
    return " ".join(s.split())


def normalize_text(s: str) -> str:
    """Lowercase, collapse and trim whitespace, drop « » and commas, drop punctuation.

    Whitespace is collapsed once more at the end: dropping a free-standing
    punctuation mark (``"a - b"``) would otherwise leave a double space and the
    function would not be idempotent.
    """
    s = _collapse(s.lower())
    s = s.translate(_EXPLICIT_REMOVALS)
    s = "".join(ch for ch in s if not unicodedata.category(ch).startswith("P"))
    return _collapse(s)


def edit_alignment(ref_tokens: Sequence, hyp_tokens: Sequence) -> EditCounts:
    """Hit/substitution/deletion/insertion counts of a unit-cost minimum edit alignment.

    Backtrace ties prefer hit-or-substitution, then deletion, then insertion.
    """
    n, m = len(ref_tokens), len(hyp_tokens)
    # dist[i][j]: edits turning ref[:i] into hyp[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        row[0] = i
        r = ref_tokens[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (r != hyp_tokens[j - 1])
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = min(sub, dele, ins)

    h = s = d = ins_count = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            same = ref_tokens[i - 1] == hyp_tokens[j - 1]
            if dist[i][j] == dist[i - 1][j - 1] + (not same):
                if same:
                    h += 1
                else:
                    s += 1
                i, j = i - 1, j - 1
                continue
        if i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            d += 1
            i -= 1
        else:
            ins_count += 1
            j -= 1
    return EditCounts(h, s, d, ins_count)


def char_tokens(text: str, include_spaces: bool = True) -> list[str]:
    norm = normalize_text(text)
    return list(norm if include_spaces else norm.replace(" ", ""))


def word_tokens(text: str) -> list[str]:
    return normalize_text(text).split()


def char_counts(ref: str, hyp: str, include_spaces: bool = True) -> EditCounts:
    return edit_alignment(char_tokens(ref, include_spaces), char_tokens(hyp, include_spaces))


def word_counts(ref: str, hyp: str) -> EditCounts:
    return edit_alignment(word_tokens(ref), word_tokens(hyp))


def cer(ref: str, hyp: str, include_spaces: bool = True) -> float:
    """(S + D + I) / (H + S + D) over characters of the normalized texts.

    Can exceed 1.0 when the hypothesis carries many insertions.
    """
    return char_counts(ref, hyp, include_spaces).rate()


def wer(ref: str, hyp: str) -> float:
    return word_counts(ref, hyp).rate()


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[k:k + n]) for k in range(len(tokens) - n + 1))


def bleu(pairs: Sequence[TranscriptPair], max_n: int = 4, smooth: bool = False) -> float:
    """Corpus BLEU with a single reference per hypothesis, in [0, 1].

    Clipped n-gram matches and totals are summed over the corpus as integers
    before the geometric mean. Orders for which no hypothesis has any n-gram
    are skipped. Without ``smooth`` any zero precision gives 0.0; ``smooth``
    adds one to numerator and denominator for n >= 2.
    """
    if not pairs:
        raise EmptyInputError("BLEU needs at least one transcript pair")
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    matches = [0] * max_n
    totals = [0] * max_n
    ref_len = hyp_len = 0
    for pair in pairs:
        ref, hyp = word_tokens(pair.reference), word_tokens(pair.hypothesis)
        ref_len += len(ref)
        hyp_len += len(hyp)
        for n in range(1, max_n + 1):
            hyp_ngrams = _ngram_counts(hyp, n)
            ref_ngrams = _ngram_counts(ref, n)
            matches[n - 1] += sum(min(c, ref_ngrams[g]) for g, c in hyp_ngrams.items())
            totals[n - 1] += sum(hyp_ngrams.values())

    if hyp_len == 0:
        return 0.0
    # orders the hypotheses are too short to contain are left out of the mean,
    # so an identical corpus of short sentences still scores 1.0
    orders = [n for n in range(max_n) if totals[n] > 0]
    log_sum = 0.0
    for n in orders:
        num, den = matches[n], totals[n]
        if smooth and n > 0:
            num, den = num + 1, den + 1
        if num == 0:
            return 0.0
        log_sum += math.log(num / den)
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return bp * math.exp(log_sum / len(orders))


def corpus_rates(pairs: Iterable[TranscriptPair], include_spaces: bool = True) -> dict[str, float]:
    """Pooled CER and WER: edit counts summed over the corpus, then divided."""
    chars = EditCounts()
    words = EditCounts()
    for p in pairs:
        chars = chars + char_counts(p.reference, p.hypothesis, include_spaces)
        words = words + word_counts(p.reference, p.hypothesis)
    return {"cer": chars.rate(), "wer": words.rate()}


def read_pairs_tsv(path: str | Path) -> list[TranscriptPair]:
    """utterance_id<TAB>reference<TAB>hypothesis, UTF-8, no header."""
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise FormatError(f"{path}:{lineno}: expected 3 tab-separated columns, got {len(cols)}")
            pairs.append(TranscriptPair(*cols))
    return pairs


def write_pairs_tsv(path: str | Path, pairs: Iterable[TranscriptPair]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for p in pairs:
            fields = (p.utterance_id, p.reference, p.hypothesis)
            fh.write("\t".join(" ".join(f.split()) for f in fields) + "\n")
