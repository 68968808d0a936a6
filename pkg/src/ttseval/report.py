"""Table-shaped evaluation reports (JSON, CSV, text) and the MOS bar chart."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping
from xml.sax.saxutils import escape

from . import __version__

SCHEMA_VERSION = 1
LOWER = "better-lower"
HIGHER = "better-higher"
ARROWS = {LOWER: "↓", HIGHER: "↑"}

# display order and default direction of the known metrics
KNOWN_METRICS = {
    "MCD": LOWER,
    "log-F0 RMSE": LOWER,
    "PGAN Score": HIGHER,
    "MelGAN Score": HIGHER,
    "CER": LOWER,
    "WER": LOWER,
    "BLEU": HIGHER,
}


@dataclass(frozen=True)
class MetricValue:
    """Either a scalar ``value`` or a ``mean`` with ``std``."""

    direction: str
    n: int
    value: float | None = None
    mean: float | None = None
    std: float | None = None

    def __post_init__(self):
        if self.direction not in ARROWS:
            raise ValueError(f"direction must be {LOWER!r} or {HIGHER!r}, got {self.direction!r}")
        if (self.value is None) == (self.mean is None):
            raise ValueError("metric needs exactly one of value or mean")
        if self.mean is not None and self.std is None:
            raise ValueError("mean without std")

    def to_json(self) -> dict:
        out = {"direction": self.direction}
        if self.value is not None:
            out["value"] = self.value
        else:
            out["mean"] = self.mean
            out["std"] = self.std
        out["n"] = self.n
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "MetricValue":
        return cls(
            direction=obj["direction"],
            n=obj["n"],
            value=obj.get("value"),
            mean=obj.get("mean"),
            std=obj.get("std"),
        )

    def render(self) -> str:
        if self.value is not None:
            return f"{self.value:.2f}"
        return f"{self.mean:.2f} ± {self.std:.2f}"


def metric(name: str, *, value=None, mean=None, std=None, n: int = 1, direction: str | None = None) -> MetricValue:
    if direction is None:
        try:
            direction = KNOWN_METRICS[name]
        except KeyError:
            raise ValueError(f"metric {name!r} is not a known metric; pass direction explicitly") from None
    return MetricValue(direction=direction, n=n, value=value, mean=mean, std=std)


def ordered_names(names) -> list[str]:
    known = [m for m in KNOWN_METRICS if m in names]
    return known + sorted(set(names) - set(KNOWN_METRICS))


@dataclass(frozen=True)
class EvalReport:
    corpus_name: str
    metrics: Mapping[str, MetricValue]
    provenance: Mapping = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "corpus_name": self.corpus_name,
            "metrics": {name: self.metrics[name].to_json() for name in ordered_names(self.metrics)},
            "provenance": _sorted_mapping(self.provenance),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, obj: Mapping) -> "EvalReport":
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema_version {obj.get('schema_version')!r}")
        return cls(
            corpus_name=obj["corpus_name"],
            metrics={k: MetricValue.from_json(v) for k, v in obj["metrics"].items()},
            provenance=obj.get("provenance", {}),
            schema_version=obj["schema_version"],
        )

    @classmethod
    def loads(cls, text: str) -> "EvalReport":
        return cls.from_json(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, EvalReport):
            return NotImplemented
        return self.to_json() == other.to_json()


def _sorted_mapping(obj):
    if isinstance(obj, Mapping):
        return {k: _sorted_mapping(obj[k]) for k in sorted(obj)}
    if isinstance(obj, (list, tuple)):
        return [_sorted_mapping(v) for v in obj]
    return obj


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return "sha256:" + h.hexdigest()


def provenance(config: Mapping, inputs: Mapping[str, str | Path]) -> dict:
    """Tool version, config snapshot and sha256 digests keyed by the caller's input labels."""
    return {
        "tool_version": __version__,
        "config": _sorted_mapping(dict(config)),
        "input_digests": {label: file_digest(p) for label, p in sorted(inputs.items())},
    }


def render_table(report: EvalReport) -> str:
    """Human view: one ``<arrow> <metric> | <value>`` row per metric, 2 decimals."""
    lines = [report.corpus_name, "Metric Name | Error / Score"]
    for name in ordered_names(report.metrics):
        m = report.metrics[name]
        lines.append(f"{ARROWS[m.direction]} {name} | {m.render()}")
    return "\n".join(lines) + "\n"


def render_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "direction", "value", "mean", "std", "n"])
    for name in ordered_names(report.metrics):
        m = report.metrics[name]
        cells = [m.value, m.mean, m.std]
        writer.writerow([name, m.direction] + ["" if c is None else repr(c) for c in cells] + [m.n])
    return buf.getvalue()


def emit_report(
    corpus_name: str,
    metrics: Mapping[str, MetricValue],
    out_json: str | Path | None = None,
    out_csv: str | Path | None = None,
    prov: Mapping | None = None,
) -> EvalReport:
    """Build the report and write JSON/CSV when paths are given."""
    if not metrics:
        raise ValueError("a report needs at least one metric")
    report = EvalReport(corpus_name, dict(metrics), prov or {})
    if out_json is not None:
        Path(out_json).write_text(report.dumps(), encoding="utf-8")
    if out_csv is not None:
        Path(out_csv).write_text(render_csv(report), encoding="utf-8")
    return report


def _label(x: float) -> str:
    text = f"{x:.2f}"
    return text[:-1] if text.endswith("0") else text


def emit_mos_chart(aggregates: Mapping[str, float], path: str | Path | None = None, title: str = "MOS") -> str:
    """SVG 1.1 bar chart, one bar per system, y axis fixed to [1, 5].

    ``aggregates`` maps system name to its mean (objects with a ``mean``
    attribute are accepted too). Output is byte-deterministic.
    """
    if not aggregates:
        raise ValueError("chart needs at least one system")
    means = {k: float(getattr(v, "mean", v)) for k, v in aggregates.items()}
    bar_w, gap, left, top, plot_h = 60, 30, 50, 40, 200
    width = left + len(means) * (bar_w + gap) + gap
    height = top + plot_h + 50

    def y(score: float) -> float:
        return top + plot_h * (5.0 - min(max(score, 1.0), 5.0)) / 4.0

    parts = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{width - 10}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for tick in range(1, 6):
        ty = y(tick)
        parts.append(f'<line x1="{left - 4}" y1="{ty:.1f}" x2="{left}" y2="{ty:.1f}" stroke="black"/>')
        parts.append(
            f'<text x="{left - 8}" y="{ty + 4:.1f}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{tick}</text>'
        )
    for k, (system, mean) in enumerate(means.items()):
        x0 = left + gap + k * (bar_w + gap)
        y0 = y(mean)
        parts.append(
            f'<rect x="{x0}" y="{y0:.1f}" width="{bar_w}" height="{top + plot_h - y0:.1f}" '
            f'fill="#4c72b0"/>'
        )
        parts.append(
            f'<text x="{x0 + bar_w / 2:.1f}" y="{y0 - 5:.1f}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="12">{_label(mean)}</text>'
        )
        parts.append(
            f'<text x="{x0 + bar_w / 2:.1f}" y="{top + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{escape(system)}</text>'
        )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    if path is not None:
        Path(path).write_text(svg, encoding="utf-8")
    return svg
