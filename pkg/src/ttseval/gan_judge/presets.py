"""Reference discriminator topologies and random-weight bundles built from them.

The topologies follow the published Parallel WaveGAN and MelGAN
discriminators. Two simplifications are forced by the layer set: MelGAN's
reflection padding becomes zero padding, and weight normalization is assumed
folded into the stored weights.
"""

from __future__ import annotations

import numpy as np

from .bundle import DiscriminatorBundle, LayerSpec

PRESETS = ("parallel_wavegan", "melgan")


def _conv(c_in, c_out, kernel, stride=1, dilation=1, groups=1, padding=None):
    if padding is None:
        padding = dilation * (kernel - 1) // 2
    return LayerSpec("conv1d", c_in, c_out, kernel, stride, dilation, groups, padding)


def parallel_wavegan_layers(channels: int = 64, n_layers: int = 10, kernel: int = 3, slope: float = 0.2):
    """Non-causal dilated conv stack; dilations 1, 1, 2, 3, ... with a 1-channel output conv."""
    layers = []
    c_in = 1
    for i in range(n_layers - 1):
        layers += [_conv(c_in, channels, kernel, dilation=max(i, 1)), LayerSpec("leaky_relu", slope=slope)]
        c_in = channels
    layers.append(_conv(c_in, 1, kernel, dilation=max(n_layers - 1, 1)))
    return tuple(layers)


def melgan_block(base_channels: int = 16, max_channels: int = 1024, slope: float = 0.2):
    """One MelGAN scale: k15 conv, four grouped stride-4 k41 convs, k5 conv, k3 output conv."""
    act = LayerSpec("leaky_relu", slope=slope)
    layers = [_conv(1, base_channels, 15), act]
    c_in = base_channels
    for _ in range(4):
        c_out = min(c_in * 4, max_channels)
        layers += [_conv(c_in, c_out, 41, stride=4, groups=max(c_in // 4, 1)), act]
        c_in = c_out
    layers += [_conv(c_in, c_in, 5), act, _conv(c_in, 1, 3)]
    return tuple(layers)


MELGAN_POOL = LayerSpec("avg_pool1d", kernel=4, stride=2, padding=1)


def preset_topology(preset: str, **kwargs):
    """(discriminators, inter_scale_pool) for a named preset."""
    if preset == "parallel_wavegan":
        return (parallel_wavegan_layers(**kwargs),), None
    if preset == "melgan":
        block = melgan_block(**kwargs)
        return (block, block, block), MELGAN_POOL
    raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")


def random_bundle(preset: str, seed: int = 0, name: str | None = None, **kwargs) -> DiscriminatorBundle:
    """Preset topology with He-scaled Gaussian weights and small biases.

    Only useful for plumbing and determinism tests; scores from random weights
    carry no quality signal.
    """
    discs, pool = preset_topology(preset, **kwargs)
    rng = np.random.default_rng(seed)
    tensors = {}
    for d, layers in enumerate(discs):
        for i, spec in enumerate(layers):
            if spec.kind != "conv1d":
                continue
            fan_in = spec.weight_shape[1] * spec.kernel
            tensors[f"d{d}.l{i}.weight"] = rng.normal(0.0, np.sqrt(2.0 / fan_in), spec.weight_shape)
            tensors[f"d{d}.l{i}.bias"] = rng.normal(0.0, 0.01, spec.out_channels)
    return DiscriminatorBundle(
        name=name or f"{preset}-random-{seed}",
        discriminators=discs,
        inter_scale_pool=pool,
        tensors=tensors,
        style=preset,
    )
