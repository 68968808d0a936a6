"""Miniature synthetic corpus for smoke-testing the full CLI pipeline.

``build_fixture(root)`` writes five reference/synthesized utterance pairs
(harmonic tones with a moving pitch and a speech-like envelope; the
synthesized side is time-stretched and slightly detuned), a manifest, a stub
ASR script with canned transcripts, random-weight discriminator bundles, and
a complete 15 x 7 listening-test grid for two systems.

Run ``python -m ttseval.fixtures DIR`` to materialize it.
"""

from __future__ import annotations

import json
import shlex
import sys
from pathlib import Path

import numpy as np

from . import CANONICAL_RATE
from .audio_io import Waveform, write_wav
from .corpus import ManifestEntry, write_manifest
from .gan_judge import random_bundle, save_bundle
from .mos import Rating

SENTENCES = [
    ("In Gegenrichtung wurde jedoch eine Leitplanke installiert.", "in gegenrichtung wurde eine leitplanke installiert"),
    ("Zunächst kommen aber die Rezepte ins Parlament.", "zunächst kommen aber die rezepte ins parlament"),
    ("Er führte das Servieren von Eiscreme ein.", "er führte das servieren von eis creme ein"),
    ("Guten Tag, wie geht es Ihnen?", "guten tag wie geht es ihnen"),
    ("Das Wetter in Zürich ist heute schön.", "das wetter in zürich ist heute schon"),
]
DIALECTS = ["ZH", "SG", "BE", "GR", "VS"]

ASR_STUB = '''\
import json, pathlib, sys
table = json.loads((pathlib.Path(__file__).parent / "asr_transcripts.json").read_text(encoding="utf-8"))
print(table[pathlib.Path(sys.argv[1]).stem])
'''


def synth_utterance(rng: np.random.Generator, duration: float, f0: float, stretch: float = 1.0,
                    detune: float = 1.0, sr: int = CANONICAL_RATE) -> np.ndarray:
    """Five-harmonic tone with a gliding pitch, syllable-like envelope and a little noise."""
    n = int(duration * stretch * sr)
    t = np.arange(n) / sr
    u = t / (duration * stretch)  # normalized time, identical across stretches
    pitch = f0 * detune * (1.0 + 0.15 * np.sin(2 * np.pi * 0.8 * u))
    phase = 2 * np.pi * np.cumsum(pitch) / sr
    tone = sum(np.sin(k * phase) / k for k in range(1, 6))
    envelope = 0.5 * (1 - np.cos(2 * np.pi * u)) * (0.6 + 0.4 * np.abs(np.sin(2 * np.pi * 3 * u)))
    signal = 0.3 * tone * envelope + 0.002 * rng.standard_normal(n)
    pad = np.zeros(int(0.1 * sr))
    return np.clip(np.concatenate([pad, signal, pad]), -1.0, 1.0)


def mos_ratings() -> list[Rating]:
    """Complete 15 x 7 grids for two systems with means 430/105 and 325/105.

    Integer scores over 105 cells cannot average exactly 4.1 or 3.1; these sit
    1/210 away, as close as an integer grid gets, and display as 4.1 and 3.1.
    """
    ratings = []
    for system, base in (("slowsoft-vits", 4), ("sds200-vits", 3)):
        for s in range(15):
            for r in range(7):
                # exactly 10 of the 105 cells get one extra point
                bump = 1 if (s * 7 + r) % 21 < 2 else 0
                ratings.append(Rating(f"s{s:02d}", system, f"r{r}", base + bump))
    return ratings


def build_fixture(root: str | Path, seed: int = 0) -> dict:
    root = Path(root)
    ref_dir, hyp_dir = root / "ref", root / "hyp"
    ref_dir.mkdir(parents=True, exist_ok=True)
    hyp_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    entries = []
    transcripts = {}
    for k, ((text, heard), dialect) in enumerate(zip(SENTENCES, DIALECTS)):
        utt = f"utt{k:02d}"
        duration = 0.8 + 0.1 * k
        f0 = 110.0 + 25.0 * k
        write_wav(ref_dir / f"{utt}.wav", Waveform(synth_utterance(rng, duration, f0), CANONICAL_RATE))
        hyp = synth_utterance(rng, duration, f0, stretch=1.0 + 0.05 * (k - 2), detune=1.0 + 0.02 * (k % 3))
        write_wav(hyp_dir / f"{utt}.wav", Waveform(hyp, CANONICAL_RATE))
        entries.append(ManifestEntry(utt, f"ref/{utt}.wav", text, None, dialect, f"spk{k % 2}"))
        transcripts[utt] = heard

    write_manifest(root / "manifest.tsv", entries)
    (root / "asr_stub.py").write_text(ASR_STUB, encoding="utf-8")
    (root / "asr_transcripts.json").write_text(
        json.dumps(transcripts, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    save_bundle(root / "pwg.ntb", random_bundle("parallel_wavegan", seed=seed, channels=16))
    save_bundle(root / "melgan.ntb", random_bundle("melgan", seed=seed, base_channels=4, max_channels=64))

    lines = ["sample_id,system,rater_id,score"]
    lines += [f"{r.sample_id},{r.system},{r.rater_id},{r.score}" for r in mos_ratings()]
    (root / "ratings.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    return {
        "root": root,
        "manifest": root / "manifest.tsv",
        "hyp_dir": hyp_dir,
        "asr": f"{shlex.quote(sys.executable)} {shlex.quote(str(root / 'asr_stub.py'))} {{audio}}",
        "pwg": root / "pwg.ntb",
        "melgan": root / "melgan.ntb",
        "ratings": root / "ratings.csv",
    }


if __name__ == "__main__":
    info = build_fixture(sys.argv[1] if len(sys.argv) > 1 else "fixture")
    print(f"fixture written to {info['root']}")
    print(f"ASR stub command: {info['asr']}")
