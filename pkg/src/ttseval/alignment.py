"""Dynamic time warping over feature-vector sequences."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EmptyInputError, ShapeError

Distance = str | Callable[[np.ndarray, np.ndarray], float]


@dataclass(frozen=True)
class AlignmentPath:
    pairs: tuple[tuple[int, int], ...]
    total_cost: float

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def ref_indices(self) -> np.ndarray:
        return np.fromiter((i for i, _ in self.pairs), dtype=np.intp, count=len(self.pairs))

    @property
    def hyp_indices(self) -> np.ndarray:
        return np.fromiter((j for _, j in self.pairs), dtype=np.intp, count=len(self.pairs))

    @classmethod
    def diagonal(cls, n: int) -> "AlignmentPath":
        return cls(tuple((i, i) for i in range(n)), 0.0)


def _as_matrix(seq, name: str) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeError(f"{name}: expected a sequence of vectors, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInputError(f"{name}: empty sequence")
    return arr


def pairwise_cost(ref, hyp, distance: Distance = "euclidean") -> np.ndarray:
    a, b = _as_matrix(ref, "ref"), _as_matrix(hyp, "hyp")
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"dimension mismatch: ref vectors have {a.shape[1]}, hyp vectors {b.shape[1]}")
    return cdist(a, b, metric=distance)


def dtw(ref, hyp, distance: Distance = "euclidean", band: int | None = None) -> AlignmentPath:
    """Minimum-cost monotone alignment with steps (+1,0), (0,+1), (+1,+1).

    ``distance`` is any metric accepted by :func:`scipy.spatial.distance.cdist`
    (a name such as ``"euclidean"`` / ``"cityblock"``, or a callable on two
    vectors). ``band`` optionally restricts |i - j| (Sakoe-Chiba); it is widened
    to the length difference so a path always exists.

    Ties during backtrace prefer the diagonal, then (+1,0), then (0,+1).
    """
    cost = pairwise_cost(ref, hyp, distance)
    n, m = cost.shape
    if band is not None:
        band = max(int(band), abs(n - m))
        ii, jj = np.indices((n, m))
        cost = np.where(np.abs(ii - jj) <= band, cost, np.inf)

    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        row_cost = cost[i - 1]
        prev = acc[i - 1]
        cur = acc[i]
        # diagonal and vertical predecessors vectorized, horizontal is sequential
        best = np.minimum(prev[:-1], prev[1:])
        for j in range(1, m + 1):
            b = best[j - 1]
            left = cur[j - 1]
            cur[j] = row_cost[j - 1] + (b if b <= left else left)

    i, j = n, m
    pairs = [(n - 1, m - 1)]
    while i > 1 or j > 1:
        diag, up, left = acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1]
        if diag <= up and diag <= left:
            i, j = i - 1, j - 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
        pairs.append((i - 1, j - 1))
    pairs.reverse()
    return AlignmentPath(tuple(pairs), float(acc[n, m]))


def dump_path_csv(path: str | Path, alignment: AlignmentPath) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ref_index", "hyp_index"])
        writer.writerows(alignment.pairs)
