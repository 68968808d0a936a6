"""Interpreter for declarative discriminator stacks and the discriminator score."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..audio_io import Waveform, resample
from .. import CANONICAL_RATE
from ..errors import EmptyInputError, InputTooShortError
from .bundle import DiscriminatorBundle, LayerSpec, conv_tensor_names


@dataclass(frozen=True, eq=False)
class DiscriminatorOutput:
    y_hat: np.ndarray

    def __len__(self) -> int:
        return self.y_hat.shape[0]


def conv_output_length(length: int, kernel: int, stride: int = 1, dilation: int = 1, padding: int = 0) -> int:
    span = length + 2 * padding - dilation * (kernel - 1) - 1
    return span // stride + 1 if span >= 0 else 0


def conv1d(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray | None = None,
    stride: int = 1,
    dilation: int = 1,
    groups: int = 1,
    padding: int = 0,
) -> np.ndarray:
    """Grouped, dilated 1-D cross-correlation with zero padding, float64 accumulation.

    x: (in_channels, length); weight: (out_channels, in_channels // groups, kernel).
    """
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    c_in, length = x.shape
    c_out, c_group, kernel = weight.shape
    l_out = conv_output_length(length, kernel, stride, dilation, padding)
    if l_out <= 0:
        raise InputTooShortError(
            f"conv1d: input length {length} too short for kernel {kernel}, dilation {dilation}, padding {padding}"
        )
    xp = np.pad(x, ((0, 0), (padding, padding))) if padding else x
    taps = np.arange(kernel)[:, None] * dilation + np.arange(l_out)[None, :] * stride
    cols = xp[:, taps]                                   # (c_in, kernel, l_out)
    cols = cols.reshape(groups, c_group * kernel, l_out)
    w = weight.reshape(groups, c_out // groups, c_group * kernel)
    out = np.matmul(w, cols).reshape(c_out, l_out)
    if bias is not None:
        out += np.asarray(bias, dtype=np.float64)[:, None]
    return out


def avg_pool1d(x: np.ndarray, kernel: int, stride: int = 1, padding: int = 0) -> np.ndarray:
    """Window mean over real samples only; padded positions are not counted."""
    x = np.asarray(x, dtype=np.float64)
    length = x.shape[-1]
    l_out = conv_output_length(length, kernel, stride, 1, padding)
    if l_out <= 0:
        raise InputTooShortError(f"avg_pool1d: input length {length} too short for kernel {kernel}")
    xp = np.pad(x, ((0, 0), (padding, padding))) if padding else x
    taps = np.arange(kernel)[:, None] + np.arange(l_out)[None, :] * stride
    real = ((taps >= padding) & (taps < length + padding)).sum(axis=0)
    if np.any(real == 0):
        raise InputTooShortError(f"avg_pool1d: a window of kernel {kernel} covers only padding")
    return xp[:, taps].sum(axis=1) / real


def leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x >= 0, x, slope * x)


def apply_layer(spec: LayerSpec, x: np.ndarray, weight=None, bias=None) -> np.ndarray:
    if spec.kind == "conv1d":
        return conv1d(x, weight, bias, spec.stride, spec.dilation, spec.groups, spec.padding)
    if spec.kind == "leaky_relu":
        return leaky_relu(x, spec.slope)
    return avg_pool1d(x, spec.kernel, spec.stride, spec.padding)


def _as_input(w) -> np.ndarray:
    samples = w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.float64)
    return np.asarray(samples, dtype=np.float64).reshape(1, -1)


def run_discriminator(
    layers: Sequence[LayerSpec],
    tensors: Mapping[str, np.ndarray],
    w,
    disc_index: int = 0,
) -> DiscriminatorOutput:
    """Run one discriminator stack over a waveform (or raw 1-D samples).

    ``disc_index`` selects the default tensor names ``d{k}.l{i}.weight/bias``
    for conv layers that do not name their tensors explicitly.
    """
    x = _as_input(w)
    if x.shape[1] == 0:
        raise InputTooShortError("empty waveform")
    for i, spec in enumerate(layers):
        if spec.kind == "conv1d":
            w_name, b_name = conv_tensor_names(spec, disc_index, i)
            x = apply_layer(spec, x, tensors[w_name], tensors[b_name])
        else:
            x = apply_layer(spec, x)
    if x.shape[0] != 1:
        raise ValueError(f"discriminator ended with {x.shape[0]} channels, expected 1")
    return DiscriminatorOutput(x[0].copy())


def disc_score(y_hat) -> float:
    """1 - mean((y_hat - 1)^2). Unclamped: strongly negative outputs give negative scores."""
    y = np.asarray(y_hat.y_hat if isinstance(y_hat, DiscriminatorOutput) else y_hat, dtype=np.float64)
    if y.size == 0:
        raise EmptyInputError("discriminator output is empty")
    d = y - 1.0
    return float(1.0 - np.mean(d * d))


def mean_score(scores: Sequence[float]) -> float:
    if not scores:
        raise EmptyInputError("no discriminator scores to average")
    return sum(scores) / len(scores)


def discriminator_outputs(bundle: DiscriminatorBundle, w) -> list[DiscriminatorOutput]:
    """Outputs of every discriminator; discriminator k sees the input pooled k times."""
    x = _as_input(w)
    outputs = []
    for k, layers in enumerate(bundle.discriminators):
        if k > 0:
            x = apply_layer(bundle.inter_scale_pool, x)
        outputs.append(run_discriminator(layers, bundle.tensors, x[0], disc_index=k))
    return outputs


def score_waveform(bundle: DiscriminatorBundle, w: Waveform) -> float:
    """Mean of the per-discriminator scores (a single discriminator scores alone).

    The waveform is first resampled to the bundle's declared rate, or to the
    canonical rate when the bundle declares none.
    """
    w = resample(w, bundle.sample_rate or CANONICAL_RATE)
    return mean_score([disc_score(out) for out in discriminator_outputs(bundle, w)])
