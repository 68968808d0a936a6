"""Manifest loading, deterministic train/valid/test splitting, external ASR adapter."""

from __future__ import annotations

import csv
import json
import math
import random
import shlex
import subprocess
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    AdapterError,
    AdapterTimeoutError,
    EmptyInputError,
    FormatError,
    SplitTooSmallError,
    ValidationError,
)

DIALECTS = frozenset({"AG", "BE", "BS", "GR", "LU", "SG", "VS", "ZH"})
MANIFEST_COLUMNS = ("utterance_id", "audio_path", "text_standard", "text_dialect", "dialect", "speaker")
REQUIRED_COLUMNS = MANIFEST_COLUMNS[:3]


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    audio_path: str
    text_standard: str
    text_dialect: str | None = None
    dialect: str | None = None
    speaker: str | None = None

    def __post_init__(self):
        if not self.utterance_id:
            raise ValidationError("manifest entry with empty utterance_id")
        if self.dialect is not None and self.dialect not in DIALECTS:
            raise ValidationError(
                f"utterance {self.utterance_id!r}: unknown dialect tag {self.dialect!r}"
            )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.9
    valid_fraction: float = 0.05
    test_fraction: float = 0.05
    seed: int = 0

    def __post_init__(self):
        fractions = (self.train_fraction, self.valid_fraction, self.test_fraction)
        if min(fractions) <= 0:
            raise ValidationError(f"split fractions must be positive, got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValidationError(f"split fractions must sum to 1, got {sum(fractions)!r}")


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Parse a UTF-8 TSV manifest with a header row; optional columns may be absent."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None:
            raise FormatError(f"{path}: empty file, expected a header row")
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise FormatError(f"{path}: missing column(s) {', '.join(missing)}")
        index = {name: header.index(name) for name in MANIFEST_COLUMNS if name in header}
        entries = []
        seen = set()
        for lineno, row in enumerate(reader, 2):
            if not row or row == [""]:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: {len(row)} fields, header has {len(header)}")
            values = {name: (row[i] or None) for name, i in index.items()}
            for name in REQUIRED_COLUMNS[:2]:
                if values[name] is None:
                    raise FormatError(f"{path}:{lineno}: empty {name}")
            values["text_standard"] = values["text_standard"] or ""
            entry = ManifestEntry(**values)
            if entry.utterance_id in seen:
                raise ValidationError(f"{path}:{lineno}: duplicate utterance_id {entry.utterance_id!r}")
            seen.add(entry.utterance_id)
            entries.append(entry)
    return entries


def write_manifest(path: str | Path, entries: Sequence[ManifestEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(MANIFEST_COLUMNS) + "\n")
        for e in entries:
            fh.write("\t".join(getattr(e, c) or "" for c in MANIFEST_COLUMNS) + "\n")


def _exact(x: float) -> Fraction:
    # decimal literal semantics: 0.05 means 1/20, not the nearest binary double
    return Fraction(repr(float(x)))


def split_counts(n: int, spec: SplitSpec) -> tuple[int, int, int]:
    """floor(train * N), round-half-up(valid * N), remainder."""
    n_train = math.floor(_exact(spec.train_fraction) * n)
    n_valid = math.floor(_exact(spec.valid_fraction) * n + Fraction(1, 2))
    n_test = n - n_train - n_valid
    if min(n_train, n_valid, n_test) <= 0:
        raise SplitTooSmallError(
            f"{n} entries give split sizes ({n_train}, {n_valid}, {n_test}); every part must be non-empty"
        )
    return n_train, n_valid, n_test


def split(entries: Sequence[ManifestEntry], spec: SplitSpec = SplitSpec()):
    """Seeded Fisher-Yates shuffle of the id-sorted entries, then cut by :func:`split_counts`.

    Row order in the source manifest does not affect the result.
    """
    if not entries:
        raise EmptyInputError("cannot split an empty manifest")
    n_train, n_valid, _ = split_counts(len(entries), spec)
    ordered = sorted(entries, key=lambda e: e.utterance_id)
    random.Random(spec.seed).shuffle(ordered)
    return (
        ordered[:n_train],
        ordered[n_train:n_train + n_valid],
        ordered[n_train + n_valid:],
    )


def write_split(out_dir: str | Path, parts, spec: SplitSpec) -> dict:
    """train.tsv / valid.tsv / test.tsv plus split.json with seed, fractions and counts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = ("train", "valid", "test")
    for name, part in zip(names, parts):
        write_manifest(out_dir / f"{name}.tsv", part)
    meta = {
        "seed": spec.seed,
        "fractions": {
            "train": spec.train_fraction,
            "valid": spec.valid_fraction,
            "test": spec.test_fraction,
        },
        "counts": {name: len(part) for name, part in zip(names, parts)},
    }
    (out_dir / "split.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return meta


def _is_endpoint(adapter: str) -> bool:
    return adapter.startswith(("http://", "https://"))


def transcribe_external(adapter: str, audio_path: str | Path, timeout: float = 60.0) -> str:
    """Transcribe one file through an external ASR.

    ``adapter`` is either a command template, where ``{audio}`` is replaced by
    the file path (appended as the last argument when absent), or an
    ``http(s)://`` endpoint that receives the WAV bytes in a POST body.
    The transcript is stdout or the response body, minus trailing newlines.
    """
    audio_path = Path(audio_path)
    if not audio_path.exists():
        raise FileNotFoundError(audio_path)
    if _is_endpoint(adapter):
        return _transcribe_http(adapter, audio_path, timeout)

    args = shlex.split(adapter)
    if not args:
        raise AdapterError("empty ASR command")
    if any("{audio}" in a for a in args):
        args = [a.replace("{audio}", str(audio_path)) for a in args]
    else:
        args.append(str(audio_path))
    try:
        proc = subprocess.run(args, capture_output=True, timeout=timeout, check=False)
    except subprocess.TimeoutExpired:
        raise AdapterTimeoutError(f"ASR command timed out after {timeout}s on {audio_path}") from None
    except OSError as exc:
        raise AdapterError(f"cannot run ASR command {args[0]!r}: {exc}") from None
    stderr = proc.stderr.decode("utf-8", "replace")
    if proc.returncode != 0:
        raise AdapterError(f"ASR command exited with status {proc.returncode} on {audio_path}", stderr)
    return proc.stdout.decode("utf-8").rstrip("\r\n")


def _transcribe_http(url: str, audio_path: Path, timeout: float) -> str:
    req = urllib.request.Request(
        url, data=audio_path.read_bytes(), method="POST", headers={"Content-Type": "audio/wav"}
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            body = resp.read().decode("utf-8")
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode("utf-8", "replace")
        raise AdapterError(f"ASR endpoint returned HTTP {exc.code} for {audio_path}", detail) from None
    except TimeoutError:
        raise AdapterTimeoutError(f"ASR endpoint timed out after {timeout}s on {audio_path}") from None
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, TimeoutError):
            raise AdapterTimeoutError(f"ASR endpoint timed out after {timeout}s on {audio_path}") from None
        raise AdapterError(f"ASR endpoint unreachable: {exc.reason}") from None
    return body.rstrip("\r\n")


def transcribe_many(
    adapter: str,
    audio_paths: Mapping[str, str | Path],
    workers: int = 4,
    timeout: float = 60.0,
) -> dict[str, str]:
    """Transcribe {utterance_id: path} concurrently; results come back keyed and id-sorted."""
    ids = sorted(audio_paths)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda i: transcribe_external(adapter, audio_paths[i], timeout), ids))
    return dict(zip(ids, results))
