"""GAN-vocoder discriminators as a quality judge for synthesized speech."""

from .bundle import (
    DiscriminatorBundle,
    LayerSpec,
    dumps_bundle,
    load_bundle,
    loads_bundle,
    save_bundle,
)
from .engine import (
    DiscriminatorOutput,
    avg_pool1d,
    conv1d,
    conv_output_length,
    disc_score,
    discriminator_outputs,
    mean_score,
    run_discriminator,
    score_waveform,
)
from .presets import preset_topology, random_bundle

__all__ = [
    "DiscriminatorBundle",
    "DiscriminatorOutput",
    "LayerSpec",
    "avg_pool1d",
    "conv1d",
    "conv_output_length",
    "disc_score",
    "discriminator_outputs",
    "dumps_bundle",
    "load_bundle",
    "loads_bundle",
    "mean_score",
    "preset_topology",
    "random_bundle",
    "run_discriminator",
    "save_bundle",
    "score_waveform",
]
