"""Validation and aggregation of 5-point Mean Opinion Score ratings."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyInputError, FormatError, ValidationError

SCALE = range(1, 6)
RATING_COLUMNS = ("sample_id", "system", "rater_id", "score")


@dataclass(frozen=True)
class Rating:
    sample_id: str
    system: str
    rater_id: str
    score: int

    def __post_init__(self):
        if isinstance(self.score, bool) or not isinstance(self.score, int) or self.score not in SCALE:
            raise ValidationError(
                f"rating ({self.sample_id}, {self.system}, {self.rater_id}): score {self.score!r} not an integer in 1..5"
            )


@dataclass(frozen=True)
class MosAggregate:
    mean: float
    std: float
    n_ratings: int
    n_samples: int
    n_raters: int


@dataclass(frozen=True)
class MissingCell:
    system: str
    sample_id: str
    rater_id: str


def read_ratings(path: str | Path) -> list[Rating]:
    """Ratings CSV with header sample_id,system,rater_id,score; integer scores only."""
    ratings = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in RATING_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise FormatError(f"{path}: missing column(s) {', '.join(missing)}")
        for lineno, row in enumerate(reader, 2):
            raw = (row["score"] or "").strip()
            try:
                score = int(raw)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: score {raw!r} is not an integer") from None
            try:
                ratings.append(Rating(row["sample_id"], row["system"], row["rater_id"], score))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    check_unique(ratings)
    return ratings


def check_unique(ratings: Iterable[Rating]) -> None:
    seen = set()
    for r in ratings:
        key = (r.sample_id, r.system, r.rater_id)
        if key in seen:
            raise ValidationError(f"duplicate rating for sample {key[0]!r}, system {key[1]!r}, rater {key[2]!r}")
        seen.add(key)


def _summarize(group: Sequence[Rating]) -> MosAggregate:
    scores = sorted(r.score for r in group)  # order-free sums, bit-stable under permutation
    n = len(scores)
    mean = math.fsum(scores) / n
    std = math.sqrt(math.fsum((s - mean) ** 2 for s in scores) / n)
    return MosAggregate(
        mean=mean,
        std=std,
        n_ratings=n,
        n_samples=len({r.sample_id for r in group}),
        n_raters=len({r.rater_id for r in group}),
    )


def aggregate_mos(ratings: Sequence[Rating], per_sample: bool = False) -> dict:
    """Per-system pooled mean and population std over every rating.

    With ``per_sample`` the values are dicts keyed by sample_id instead.
    """
    if not ratings:
        raise EmptyInputError("no ratings to aggregate")
    check_unique(ratings)
    groups: dict = defaultdict(list)
    for r in ratings:
        groups[(r.system, r.sample_id) if per_sample else r.system].append(r)
    if not per_sample:
        return {system: _summarize(groups[system]) for system in sorted(groups)}
    out: dict = defaultdict(dict)
    for system, sample in sorted(groups):
        out[system][sample] = _summarize(groups[(system, sample)])
    return dict(out)


def _padded(observed: set, expected: int, given, prefix: str) -> list[str]:
    if given is not None:
        return list(given)
    ids = sorted(observed)
    k = 1
    while len(ids) < expected:
        candidate = f"{prefix}{k}"
        if candidate not in observed:
            ids.append(candidate)
        k += 1
    return ids


def coverage_check(
    ratings: Sequence[Rating],
    expected_raters: int = 7,
    expected_samples: int = 15,
    systems: Sequence[str] | None = None,
    sample_ids: Sequence[str] | None = None,
    rater_ids: Sequence[str] | None = None,
) -> list[MissingCell]:
    """Every (system, sample, rater) cell of the expected grid that has no rating.

    Without explicit id lists, the grid is built from the ids seen anywhere in
    ``ratings`` and padded with placeholder ids (``sample-1``, ``rater-1``...)
    up to the expected counts. With no ratings and no ``systems`` a single
    placeholder system ``*`` is checked.
    """
    systems = sorted({r.system for r in ratings}) if systems is None else list(systems)
    if not systems:
        systems = ["*"]
    samples = _padded({r.sample_id for r in ratings}, expected_samples, sample_ids, "sample-")
    raters = _padded({r.rater_id for r in ratings}, expected_raters, rater_ids, "rater-")
    present = {(r.system, r.sample_id, r.rater_id) for r in ratings}
    return [
        MissingCell(system, sample, rater)
        for system in systems
        for sample in samples
        for rater in raters
        if (system, sample, rater) not in present
    ]
