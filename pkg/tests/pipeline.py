"""The fixture pipeline driven through the CLI entry point, shared by several tests."""

from __future__ import annotations

from pathlib import Path

from ttseval.cli import main


def run(*argv) -> None:
    code = main([str(a) for a in argv])
    assert code == 0, f"ttseval {' '.join(map(str, argv))} exited {code}"


def run_pipeline(fx: dict, out: Path) -> Path:
    """split -> eval-audio -> eval-text -> disc-score (both bundles) -> mos -> report."""
    out.mkdir(parents=True, exist_ok=True)
    # five utterances are too few for 0.9/0.05/0.05, every part must be non-empty
    run("split", "--manifest", fx["manifest"], "--seed", 7, "--fractions", "0.6,0.2,0.2", "--out-dir", out / "split")
    run("eval-audio", "--ref-manifest", fx["manifest"], "--hyp-dir", fx["hyp_dir"], "--out", out / "audio.json")
    run(
        "eval-text", "--manifest", fx["manifest"], "--hyp-dir", fx["hyp_dir"], "--asr", fx["asr"],
        "--out", out / "text.json",
    )
    run("disc-score", "--bundle", fx["pwg"], "--wav-dir", fx["hyp_dir"], "--out", out / "pwg.json")
    run("disc-score", "--bundle", fx["melgan"], "--wav-dir", fx["hyp_dir"], "--out", out / "melgan.json")
    run("mos", "--ratings", fx["ratings"], "--out", out / "mos.json")
    run(
        "report", "--corpus", "fixture",
        "--inputs", out / "audio.json", out / "text.json", out / "pwg.json", out / "melgan.json", out / "mos.json",
        "--out", out / "report.json", "--csv", out / "report.csv", "--mos-chart", out / "mos.svg",
    )
    return out / "report.json"
