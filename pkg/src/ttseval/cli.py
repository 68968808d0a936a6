"""Command-line entry point: ``ttseval <subcommand> ...``.

Exit status: 0 on success, 1 on validation/input errors, 2 on usage errors.
Every subcommand accepts ``--config FILE``, a flat ``key = value`` file whose
keys are option names (``threshold-db`` or ``threshold_db``). Precedence is
flags > config file > built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .audio_io import read_wav, to_canonical, trim_silence, write_wav
from .audio_metrics import UtteranceAudioScores, aggregate, score_utterance, write_scores_csv
from .corpus import SplitSpec, load_manifest, split, transcribe_many, write_split
from .errors import TTSEvalError, ValidationError
from .features import FrameConfig, dump_features_csv, estimate_f0, mel_cepstra
from .gan_judge import load_bundle, score_waveform
from .mos import aggregate_mos, coverage_check, read_ratings
from .report import (
    MetricValue,
    emit_mos_chart,
    emit_report,
    metric,
    provenance,
    render_table,
)
from .text_metrics import TranscriptPair, bleu, corpus_rates, read_pairs_tsv, write_pairs_tsv

log = logging.getLogger("ttseval")

# options that name files; kept out of the provenance config snapshot so that
# reports do not depend on where the inputs happen to live
PATH_OPTIONS = frozenset({
    "manifest", "ref_manifest", "hyp_dir", "out", "out_dir", "scores_csv", "pairs", "pairs_out",
    "bundle", "wav_dir", "wav", "ratings", "chart", "inputs", "csv", "mos_chart", "config",
    "workers", "command", "func", "verbose",
})


class UsageError(Exception):
    pass


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment line."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _dump_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _config_snapshot(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in PATH_OPTIONS}


def _frame_config(args) -> FrameConfig:
    return FrameConfig(
        frame_length=args.frame_length,
        hop_length=args.hop_length,
        fft_size=args.fft_size,
        mel_bands=args.mel_bands,
        cepstral_order=args.cepstral_order,
        f0_floor=args.f0_floor,
        f0_ceil=args.f0_ceil,
        voicing_threshold=args.voicing_threshold,
    )


def _resolve(base: Path, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path


def _hyp_path(hyp_dir: Path, utt_id: str) -> Path:
    path = hyp_dir / f"{utt_id}.wav"
    if not path.exists():
        raise ValidationError(f"no synthesized audio for utterance {utt_id!r} (expected {path})")
    return path


# -- subcommands -------------------------------------------------------------

def cmd_split(args) -> int:
    try:
        fractions = [float(x) for x in args.fractions.split(",")]
    except ValueError:
        raise UsageError(f"--fractions must be three comma-separated numbers, got {args.fractions!r}") from None
    if len(fractions) != 3:
        raise UsageError("--fractions needs exactly three values")
    spec = SplitSpec(*fractions, seed=args.seed)
    entries = load_manifest(args.manifest)
    parts = split(entries, spec)
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.manifest).parent
    meta = write_split(out_dir, parts, spec)
    c = meta["counts"]
    print(f"split {len(entries)} entries -> train {c['train']}, valid {c['valid']}, test {c['test']} ({out_dir})")
    return 0


def cmd_trim(args) -> int:
    if bool(args.wav) == bool(args.wav_dir):
        raise UsageError("give exactly one of --wav or --wav-dir")
    if args.wav:
        jobs = [(Path(args.wav), Path(args.out))]
    else:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        jobs = [(p, out_dir / p.name) for p in sorted(Path(args.wav_dir).glob("*.wav"))]
    for src, dst in jobs:
        w = to_canonical(read_wav(src))
        trimmed = trim_silence(w, args.threshold_db, args.frame_ms, args.hop_ms)
        write_wav(dst, trimmed)
        print(f"{src.name}: {w.duration:.3f}s -> {trimmed.duration:.3f}s")
    return 0


def cmd_features(args) -> int:
    cfg = _frame_config(args)
    w = to_canonical(read_wav(args.wav))
    ceps = mel_cepstra(w, cfg)
    pitch = estimate_f0(w, cfg)
    dump_features_csv(args.out, ceps, pitch)
    print(f"{args.wav}: {len(ceps)} frames, {int(pitch.voiced.sum())} voiced -> {args.out}")
    return 0


def cmd_eval_audio(args) -> int:
    cfg = _frame_config(args)
    manifest_path = Path(args.ref_manifest)
    entries = sorted(load_manifest(manifest_path), key=lambda e: e.utterance_id)
    if not entries:
        raise ValidationError(f"{manifest_path}: manifest has no entries")
    hyp_dir = Path(args.hyp_dir)
    jobs = {
        e.utterance_id: (_resolve(manifest_path.parent, e.audio_path), _hyp_path(hyp_dir, e.utterance_id))
        for e in entries
    }

    def work(utt_id: str) -> UtteranceAudioScores:
        ref, hyp = jobs[utt_id]
        return score_utterance(read_wav(ref), read_wav(hyp), cfg)

    ids = sorted(jobs)
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        scores = list(zip(ids, pool.map(work, ids)))

    mcd_agg = aggregate([s.mcd for _, s in scores], sample_std=args.sample_std)
    rmse_vals = [s.log_f0_rmse for _, s in scores if s.log_f0_rmse is not None]
    metrics = {"MCD": metric("MCD", mean=mcd_agg.mean, std=mcd_agg.std, n=mcd_agg.n)}
    if rmse_vals:
        agg = aggregate(rmse_vals, sample_std=args.sample_std)
        metrics["log-F0 RMSE"] = metric("log-F0 RMSE", mean=agg.mean, std=agg.std, n=agg.n)
    inputs = {"ref_manifest": manifest_path}
    for utt_id, (ref, hyp) in jobs.items():
        inputs[f"ref/{utt_id}"] = ref
        inputs[f"hyp/{utt_id}"] = hyp
    out = {
        "schema_version": 1,
        "kind": "audio",
        "metrics": {k: v.to_json() for k, v in metrics.items()},
        "utterances": [
            {"utterance_id": i, "mcd": s.mcd, "log_f0_rmse": s.log_f0_rmse, "voiced_overlap": s.voiced_overlap}
            for i, s in scores
        ],
        "provenance": provenance(_config_snapshot(args), inputs),
    }
    _dump_json(args.out, out)
    if args.scores_csv:
        write_scores_csv(args.scores_csv, scores)
    line = f"MCD {mcd_agg.mean:.2f} ± {mcd_agg.std:.2f} dB"
    if "log-F0 RMSE" in metrics:
        m = metrics["log-F0 RMSE"]
        line += f"; log-F0 RMSE {m.mean:.2f} ± {m.std:.2f}"
    print(f"{line} over {len(scores)} utterances -> {args.out}")
    return 0


def cmd_eval_text(args) -> int:
    inputs: dict = {}
    if args.pairs:
        if args.manifest or args.asr:
            raise UsageError("--pairs excludes --manifest/--asr")
        pairs = read_pairs_tsv(args.pairs)
        inputs["pairs"] = args.pairs
    else:
        if not (args.manifest and args.asr and args.hyp_dir):
            raise UsageError("give --pairs, or all of --manifest, --hyp-dir and --asr")
        entries = load_manifest(args.manifest)
        refs = {}
        for e in entries:
            ref = getattr(e, args.ref_column)
            if not ref:
                log.warning("utterance %s has no %s; skipped for text metrics", e.utterance_id, args.ref_column)
                continue
            refs[e.utterance_id] = ref
        hyp_dir = Path(args.hyp_dir)
        audio = {i: _hyp_path(hyp_dir, i) for i in refs}
        hyps = transcribe_many(args.asr, audio, workers=args.workers, timeout=args.asr_timeout)
        pairs = [TranscriptPair(i, refs[i], hyps[i]) for i in sorted(refs)]
        inputs["manifest"] = args.manifest
        inputs.update({f"hyp/{i}": p for i, p in audio.items()})
        if args.pairs_out:
            write_pairs_tsv(args.pairs_out, pairs)
    if not pairs:
        raise ValidationError("no transcript pairs to score")
    pairs = sorted(pairs, key=lambda p: p.utterance_id)
    rates = corpus_rates(pairs, include_spaces=not args.cer_no_spaces)
    score = bleu(pairs, max_n=args.max_n, smooth=args.smooth)
    n = len(pairs)
    metrics = {
        "CER": metric("CER", value=rates["cer"], n=n),
        "WER": metric("WER", value=rates["wer"], n=n),
        "BLEU": metric("BLEU", value=score, n=n),
    }
    out = {
        "schema_version": 1,
        "kind": "text",
        "metrics": {k: v.to_json() for k, v in metrics.items()},
        "utterances": [
            {"utterance_id": p.utterance_id, "reference": p.reference, "hypothesis": p.hypothesis}
            for p in pairs
        ],
        "provenance": provenance(_config_snapshot(args), inputs),
    }
    _dump_json(args.out, out)
    print(f"CER {rates['cer']:.2f}; WER {rates['wer']:.2f}; BLEU {score:.2f} over {n} pairs -> {args.out}")
    return 0


def _disc_metric_name(bundle) -> str:
    return {"parallel_wavegan": "PGAN Score", "melgan": "MelGAN Score"}.get(
        bundle.style, f"Discriminator Score ({bundle.name})"
    )


def cmd_disc_score(args) -> int:
    bundle = load_bundle(args.bundle)
    files = sorted(Path(args.wav_dir).glob("*.wav"))
    if not files:
        raise ValidationError(f"{args.wav_dir}: no .wav files")
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        scores = list(pool.map(lambda p: score_waveform(bundle, read_wav(p)), files))
    mean = sum(scores) / len(scores)
    name = args.metric_name or _disc_metric_name(bundle)
    m = metric(name, value=mean, n=len(scores), direction="better-higher")
    inputs = {"bundle": args.bundle}
    inputs.update({f"wav/{p.name}": p for p in files})
    out = {
        "schema_version": 1,
        "kind": "discriminator",
        "bundle": bundle.name,
        "files": {p.name: s for p, s in zip(files, scores)},
        "mean": mean,
        "metrics": {name: m.to_json()},
        "provenance": provenance(_config_snapshot(args), inputs),
    }
    _dump_json(args.out, out)
    print(f"{name} {mean:.2f} over {len(scores)} files -> {args.out}")
    return 0


def cmd_mos(args) -> int:
    ratings = read_ratings(args.ratings)
    aggs = aggregate_mos(ratings)
    missing = coverage_check(ratings, args.expected_raters, args.expected_samples)
    out = {
        "schema_version": 1,
        "kind": "mos",
        "systems": {s: vars(a) for s, a in aggs.items()},
        "missing_cells": [vars(c) for c in missing],
        "metrics": {
            f"MOS ({s})": metric(f"MOS ({s})", mean=a.mean, std=a.std, n=a.n_ratings, direction="better-higher").to_json()
            for s, a in aggs.items()
        },
        "provenance": provenance(_config_snapshot(args), {"ratings": args.ratings}),
    }
    if args.per_sample:
        per = aggregate_mos(ratings, per_sample=True)
        out["per_sample"] = {s: {k: vars(v) for k, v in d.items()} for s, d in per.items()}
    _dump_json(args.out, out)
    if args.chart:
        emit_mos_chart(aggs, args.chart)
    for s, a in aggs.items():
        print(f"{s}: MOS {a.mean:.2f} ± {a.std:.2f} ({a.n_ratings} ratings, {a.n_samples} samples, {a.n_raters} raters)")
    if missing:
        print(f"{len(missing)} missing (system, sample, rater) cells")
    return 0


def cmd_report(args) -> int:
    metrics: dict[str, MetricValue] = {}
    inputs = {}
    mos_systems = {}
    for p in args.inputs:
        data = json.loads(Path(p).read_text(encoding="utf-8"))
        if "metrics" not in data:
            raise ValidationError(f"{p}: not a ttseval result file (no 'metrics')")
        for name, obj in data["metrics"].items():
            if name in metrics:
                raise ValidationError(f"metric {name!r} appears in more than one input")
            metrics[name] = MetricValue.from_json(obj)
        if data.get("kind") == "mos":
            mos_systems.update({s: a["mean"] for s, a in data["systems"].items()})
        inputs[Path(p).name] = p
    prov = provenance(_config_snapshot(args), inputs)
    report = emit_report(args.corpus, metrics, args.out, args.csv, prov)
    if args.mos_chart:
        if not mos_systems:
            raise ValidationError("--mos-chart needs a mos result among the inputs")
        emit_mos_chart(dict(sorted(mos_systems.items())), args.mos_chart)
    sys.stdout.write(render_table(report))
    return 0


# -- parser ------------------------------------------------------------------

def _add_frame_options(p: argparse.ArgumentParser) -> None:
    d = FrameConfig()
    g = p.add_argument_group("analysis")
    g.add_argument("--frame-length", type=int, default=d.frame_length)
    g.add_argument("--hop-length", type=int, default=d.hop_length)
    g.add_argument("--fft-size", type=int, default=d.fft_size)
    g.add_argument("--mel-bands", type=int, default=d.mel_bands)
    g.add_argument("--cepstral-order", type=int, default=d.cepstral_order)
    g.add_argument("--f0-floor", type=float, default=d.f0_floor)
    g.add_argument("--f0-ceil", type=float, default=d.f0_ceil)
    g.add_argument("--voicing-threshold", type=float, default=d.voicing_threshold)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ttseval", description="Evaluation toolkit for TTS systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("split", parents=[common], help="deterministic train/valid/test split of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fractions", default="0.9,0.05,0.05")
    p.add_argument("--out-dir", help="defaults to the manifest's directory")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("trim", parents=[common], help="trim leading/trailing silence")
    p.add_argument("--wav")
    p.add_argument("--wav-dir")
    p.add_argument("--out", required=True, help="output file (with --wav) or directory (with --wav-dir)")
    p.add_argument("--threshold-db", type=float, default=40.0)
    p.add_argument("--frame-ms", type=float, default=25.0)
    p.add_argument("--hop-ms", type=float, default=10.0)
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("features", parents=[common], help="dump mel-cepstra and F0 as CSV")
    p.add_argument("--wav", required=True)
    p.add_argument("--out", required=True)
    _add_frame_options(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("eval-audio", parents=[common], help="MCD and log-F0 RMSE against references")
    p.add_argument("--ref-manifest", required=True)
    p.add_argument("--hyp-dir", required=True, help="directory holding <utterance_id>.wav")
    p.add_argument("--out", required=True)
    p.add_argument("--scores-csv")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--sample-std", action="store_true", help="n-1 standard deviation")
    _add_frame_options(p)
    p.set_defaults(func=cmd_eval_audio)

    p = sub.add_parser("eval-text", parents=[common], help="CER, WER and BLEU on ASR transcripts")
    p.add_argument("--pairs", help="TSV: utterance_id, reference, hypothesis")
    p.add_argument("--manifest")
    p.add_argument("--hyp-dir")
    p.add_argument("--asr", help="command template with {audio}, or http(s) endpoint")
    p.add_argument("--asr-timeout", type=float, default=60.0)
    p.add_argument("--ref-column", default="text_standard", choices=["text_standard", "text_dialect"])
    p.add_argument("--pairs-out")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--smooth", action="store_true", help="add-one smoothing for n >= 2")
    p.add_argument("--cer-no-spaces", action="store_true")
    p.set_defaults(func=cmd_eval_text)

    p = sub.add_parser("disc-score", parents=[common], help="vocoder-discriminator score")
    p.add_argument("--bundle", required=True)
    p.add_argument("--wav-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--metric-name")
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_disc_score)

    p = sub.add_parser("mos", parents=[common], help="aggregate listening-test ratings")
    p.add_argument("--ratings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--chart")
    p.add_argument("--expected-raters", type=int, default=7)
    p.add_argument("--expected-samples", type=int, default=15)
    p.add_argument("--per-sample", action="store_true")
    p.set_defaults(func=cmd_mos)

    p = sub.add_parser("report", parents=[common], help="merge results into a table-shaped report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--mos-chart")
    p.set_defaults(func=cmd_report)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if not known.config or command is None:
        return parser.parse_args(argv)
    subparser = choices[command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in read_config(known.config).items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"{known.config}: unknown key {key!r} for {command}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif action.nargs in ("+", "*"):
            defaults[key] = [action.type(v) if action.type else v for v in raw.split()]
        else:
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except ValueError:
                raise UsageError(f"{known.config}: bad value {raw!r} for {key}") from None
        action.required = False
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ttseval: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ttseval: error: {exc}", file=sys.stderr)
        return 2
    except (TTSEvalError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"ttseval: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
