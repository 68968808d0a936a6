"""Acceptance suite: one test per primary criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` to see the lines inline;
they are also repeated in the terminal summary of any pytest run.
"""

import math
import random
import shutil
import time

import numpy as np

from acceptance_log import record
from conftest import sine
from oracles import (
    conv_length_enumerated,
    disc_score_loop,
    dtw_bruteforce,
    forward_loops,
    grid,
    levenshtein,
    split_counts_decimal,
)
from pipeline import run_pipeline
from ttseval.alignment import AlignmentPath, dtw
from ttseval.audio_io import Waveform
from ttseval.audio_metrics import log_f0_rmse, mcd
from ttseval.corpus import ManifestEntry, SplitSpec, split, split_counts, write_split
from ttseval.features import MelCepstraSequence, PitchTrack, estimate_f0
from ttseval.fixtures import build_fixture, mos_ratings
from ttseval.gan_judge import LayerSpec, conv1d, conv_output_length, disc_score, mean_score, run_discriminator
from ttseval.mos import MissingCell, aggregate_mos, coverage_check
from ttseval.text_metrics import TranscriptPair, bleu, cer, edit_alignment, normalize_text, wer

HOP = 256 / 22050


class Checks:
    """Accumulates named sub-checks so a criterion reports all its failures at once."""

    def __init__(self):
        self.failed: list[str] = []

    def __call__(self, name: str, ok) -> None:
        if not ok:
            self.failed.append(name)

    def finish(self, criterion: str, detail: str = "") -> None:
        ok = not self.failed
        record(criterion, ok, detail if ok else "failed: " + "; ".join(self.failed[:5]))
        assert ok, self.failed


def test_edit_distance_oracle():
    c = Checks()
    rng = random.Random(2024)
    start = time.perf_counter()
    for _ in range(1000):
        a = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 12)))
        b = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 12)))
        counts = edit_alignment(a, b)
        c(f"distance {a!r}/{b!r}", counts.errors == levenshtein(a, b))
        c(f"H+S+D {a!r}", counts.hits + counts.substitutions + counts.deletions == len(a))
    elapsed = time.perf_counter() - start
    c(f"runtime {elapsed:.2f}s", elapsed < 5)
    c.finish("edit-distance oracle: 1000 pairs vs brute-force Levenshtein", f"{elapsed:.2f}s")


def test_cer_wer_worked_cases():
    c = Checks()
    c("cer abc/axc", cer("abc", "axc") == 1 / 3)
    c("cer ab/abc", cer("ab", "abc") == 0.5)
    c("wer guten tag/gute tag", wer("guten tag", "gute tag") == 0.5)
    norm = normalize_text("Hallo,  Welt! ")
    c("normalize", norm == "hallo welt")
    c("idempotent", normalize_text(norm) == norm)
    c.finish("CER/WER worked cases and normalization fixture")


def test_dtw_oracle():
    c = Checks()
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    for _ in range(500):
        d = int(rng.integers(1, 4))
        a = rng.normal(size=(int(rng.integers(1, 7)), d))
        b = rng.normal(size=(int(rng.integers(1, 7)), d))
        cost = dtw(a, b).total_cost
        c("brute force", abs(cost - dtw_bruteforce(a, b)) <= 1e-12)
        c("self zero", dtw(a, a).total_cost == 0.0)
        c("symmetry", abs(cost - dtw(b, a).total_cost) <= 1e-12)
    elapsed = time.perf_counter() - start
    c(f"runtime {elapsed:.2f}s", elapsed < 10)
    c.finish("DTW oracle: 500 pairs vs exhaustive monotone paths", f"{elapsed:.2f}s")


def test_mcd_closed_form():
    c = Checks()
    expected = 10 * math.sqrt(2) / math.log(10)
    got = mcd(MelCepstraSequence(np.array([[0.0, 0.0, 0.0]]), HOP), MelCepstraSequence(np.array([[0.0, 1.0, 0.0]]), HOP))
    c(f"unit c1 difference {got!r}", abs(got - expected) <= 1e-9)
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = MelCepstraSequence(rng.normal(size=(int(rng.integers(1, 40)), 25)), HOP)
        c("mcd(a, a)", mcd(a, a) == 0.0)
    c.finish("MCD closed form and self-distance", f"{got:.6f} dB")


def test_f0_accuracy():
    c = Checks()
    notes = []
    for freq in (120, 220, 330):
        track = estimate_f0(sine(freq))
        voiced = track.voiced
        accurate = voiced & (np.abs(track.f0 - freq) <= 3)
        share = accurate.mean()
        notes.append(f"{freq}Hz {share:.0%}")
        c(f"{freq} Hz share {share:.2f}", share >= 0.9)
    c("silence", not estimate_f0(Waveform(np.zeros(22050), 22050)).voiced.any())
    ref = PitchTrack(np.full(20, 200.0), HOP)
    hyp = PitchTrack(np.full(20, 220.0), HOP)
    got = log_f0_rmse(ref, hyp, AlignmentPath.diagonal(20))
    c("log-F0 RMSE 200/220", abs(got - abs(math.log(220 / 200))) <= 1e-9)
    c.finish("F0 accuracy on sines, silence and log-F0 RMSE", ", ".join(notes))


def test_discriminator_score():
    c = Checks()
    rng = np.random.default_rng(5)
    lengths = list(rng.integers(1, 100_001, 99)) + [100_000]
    for n in lengths:
        y = rng.normal(1.0, 1.5, int(n))
        c(f"oracle len {n}", abs(disc_score(y) - disc_score_loop(y)) <= 1e-9)
    c("all ones", disc_score(np.ones(1000)) == 1.0)
    c("all zeros", disc_score(np.zeros(1000)) == 0.0)
    c("mean of three", mean_score([0.9, 0.6, 0.3]) == 0.6)
    c.finish("discriminator score vs scalar oracle and exact endpoints")


def _random_stack(rng):
    layers, tensors = [], {}
    n_conv = int(rng.integers(1, 5))
    c_in = 1
    for i in range(n_conv):
        last = i == n_conv - 1
        options = [g for g in (1, 2, 4) if c_in % g == 0] if not last else [1]
        groups = int(rng.choice(options))
        c_out = 1 if last else groups * int(rng.integers(1, 8 // groups + 1))
        spec = LayerSpec(
            "conv1d", c_in, c_out, int(rng.integers(1, 6)),
            stride=int(rng.integers(1, 3)), dilation=int(rng.integers(1, 4)),
            groups=groups, padding=int(rng.integers(0, 4)),
        )
        idx = len(layers)
        layers.append(spec)
        tensors[f"d0.l{idx}.weight"] = rng.normal(size=spec.weight_shape).astype(np.float32)
        tensors[f"d0.l{idx}.bias"] = rng.normal(size=c_out).astype(np.float32)
        if not last:
            layers.append(LayerSpec("leaky_relu", slope=0.2))
        c_in = c_out
    return layers, tensors


def test_inference_engine_oracle():
    c = Checks()
    rng = np.random.default_rng(9)
    start = time.perf_counter()
    done = 0
    while done < 50:
        layers, tensors = _random_stack(rng)
        x = rng.normal(size=int(rng.integers(32, 65)))
        try:
            got = run_discriminator(layers, tensors, x).y_hat
        except ValueError:
            continue  # receptive field longer than the input; draw again
        expected = np.array(forward_loops(layers, tensors, x))
        c("shape", got.shape == expected.shape)
        c("values", got.shape == expected.shape and np.allclose(got, expected, rtol=1e-5, atol=1e-9))
        done += 1
    cases = grid(range(1, 20), range(1, 6), range(1, 4), range(1, 4), range(0, 3))
    for length, kernel, stride, dilation, padding in cases:
        expected = conv_length_enumerated(length, kernel, stride, dilation, padding)
        c("length formula", conv_output_length(length, kernel, stride, dilation, padding) == expected)
        if expected:
            out = conv1d(np.ones((1, length)), np.ones((1, 1, kernel)), None, stride, dilation, 1, padding)
            c("length executed", out.shape[1] == expected)
    elapsed = time.perf_counter() - start
    c(f"runtime {elapsed:.2f}s", elapsed < 30)
    c.finish("inference engine vs nested-loop oracle; conv length grid", f"{len(cases)} grid cases, {elapsed:.2f}s")


def test_split_rule():
    c = Checks()
    c("2291", split_counts(2291, SplitSpec()) == (2061, 115, 115))
    c("30921", split_counts(30921, SplitSpec()) == (27828, 1546, 1547))
    rng = random.Random(3)
    for n in [rng.randint(20, 5000) for _ in range(40)]:
        c(f"oracle {n}", split_counts(n, SplitSpec()) == split_counts_decimal(n))
        entries = [ManifestEntry(f"id{k}", f"{k}.wav", "t") for k in range(n)]
        parts = split(entries, SplitSpec(seed=n))
        ids = [e.utterance_id for p in parts for e in p]
        c(f"partition {n}", len(ids) == n and set(ids) == {e.utterance_id for e in entries})
    c.finish("split rule reproduces the corpus table; partition property")


def test_split_determinism(tmp_path):
    c = Checks()
    entries = [ManifestEntry(f"id{k:04d}", f"{k}.wav", "t") for k in range(2291)]
    spec = SplitSpec(seed=7)
    for d in ("a", "b"):
        write_split(tmp_path / d, split(entries[::-1] if d == "b" else entries, spec), spec)
    for name in ("train.tsv", "valid.tsv", "test.tsv", "split.json"):
        c(name, (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes())
    c.finish("split same-seed determinism, byte-exact")


def test_bleu_endpoints():
    c = Checks()
    same = [TranscriptPair("a", "grüezi mitenand", "grüezi mitenand"), TranscriptPair("b", "wie gahts", "wie gahts")]
    c("identical", bleu(same) == 1.0)
    c("disjoint", bleu([TranscriptPair("a", "a b c d", "e f g h")]) == 0.0)
    got = bleu([TranscriptPair("a", "the cat sat", "the cat")], max_n=2)
    c(f"hand case {got}", abs(got - 0.6065) <= 1e-4)
    c.finish("BLEU endpoints and hand-computed case", f"{got:.4f}")


def test_mos_fixture():
    c = Checks()
    ratings = mos_ratings()
    aggs = aggregate_mos(ratings)
    targets = {"slowsoft-vits": 4.1, "sds200-vits": 3.1}
    for system, target in targets.items():
        a = aggs[system]
        c(f"{system} grid", (a.n_samples, a.n_raters, a.n_ratings) == (15, 7, 105))
        # 105 integer scores cannot sum to 105 * target; the fixture is the closest grid
        best = min(abs(k / 105 - target) for k in range(105, 526))
        c(f"{system} closest mean", math.isclose(abs(a.mean - target), best, abs_tol=1e-12))
        c(f"{system} shown as {target}", f"{a.mean:.1f}" == f"{target:.1f}")
    c("complete grid", coverage_check(ratings) == [])
    removed = [r for r in ratings if (r.system, r.sample_id, r.rater_id) != ("sds200-vits", "s04", "r3")]
    c("removed cell flagged", coverage_check(removed) == [MissingCell("sds200-vits", "s04", "r3")])
    means = ", ".join(f"{s} {aggs[s].mean:.4f}" for s in targets)
    c.finish("MOS fixture reproduces 4.1 and 3.1; coverage flags a removed cell", means)


def test_end_to_end_smoke(tmp_path):
    c = Checks()
    start = time.perf_counter()
    outputs = []
    for run in ("first", "second"):
        root = tmp_path / "fixture"
        if root.exists():
            shutil.rmtree(root)
        fx = build_fixture(root)
        report = run_pipeline(fx, tmp_path / run)
        outputs.append({name: (report.parent / name).read_bytes() for name in ("report.json", "report.csv", "mos.svg")})
    elapsed = time.perf_counter() - start
    for name in outputs[0]:
        c(f"{name} byte-identical", outputs[0][name] == outputs[1][name])
    c(f"runtime {elapsed:.1f}s for two runs", elapsed / 2 < 60)
    c.finish("end-to-end smoke: split, eval-audio, eval-text, disc-score, report", f"{elapsed / 2:.1f}s per run")
