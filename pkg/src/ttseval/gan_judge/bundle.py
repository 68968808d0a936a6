"""NTB1 weight-bundle container: declarative layer topology plus named f32 tensors.

Layout (little-endian)::

    bytes 0-3   b"NTB1"
    bytes 4-7   u32 header length H
    bytes 8..   H bytes of UTF-8 JSON header
    then        raw f32 blob; tensor offsets count elements from the blob start

Header fields: ``name``, ``discriminators`` (list of layer lists),
``inter_scale_pool`` (an avg_pool1d layer or null) and ``tensors``
(``[{name, shape, offset, dtype: "f32"}]``). Two optional fields are also
understood: ``style`` ("parallel_wavegan" or "melgan", which pins the
discriminator count) and ``sample_rate`` (the rate the discriminators were
trained at).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ..errors import FormatError, ValidationError

MAGIC = b"NTB1"
LAYER_KINDS = ("conv1d", "leaky_relu", "avg_pool1d")
STYLE_DISCRIMINATOR_COUNT = {"parallel_wavegan": 1, "melgan": 3}


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_channels: int = 1
    out_channels: int = 1
    kernel: int = 1
    stride: int = 1
    dilation: int = 1
    groups: int = 1
    padding: int = 0
    slope: float = 0.2
    weight: str | None = None
    bias: str | None = None

    def validate(self, where: str) -> None:
        if self.kind not in LAYER_KINDS:
            raise ValidationError(f"{where}: unknown layer kind {self.kind!r}")
        if self.kind == "leaky_relu":
            if not math.isfinite(self.slope):
                raise ValidationError(f"{where}: leaky_relu slope must be finite")
            return
        if self.kernel < 1 or self.stride < 1 or self.padding < 0:
            raise ValidationError(f"{where}: kernel/stride must be >= 1 and padding >= 0")
        if self.kind == "conv1d":
            if min(self.in_channels, self.out_channels, self.dilation, self.groups) < 1:
                raise ValidationError(f"{where}: channels, dilation and groups must be >= 1")
            if self.in_channels % self.groups or self.out_channels % self.groups:
                raise ValidationError(
                    f"{where}: channels {self.in_channels}->{self.out_channels} not divisible by groups {self.groups}"
                )

    @property
    def weight_shape(self) -> tuple[int, int, int]:
        return (self.out_channels, self.in_channels // self.groups, self.kernel)

    def to_json(self) -> dict:
        if self.kind == "leaky_relu":
            return {"kind": self.kind, "slope": self.slope}
        if self.kind == "avg_pool1d":
            return {"kind": self.kind, "kernel": self.kernel, "stride": self.stride, "padding": self.padding}
        out = {
            "kind": self.kind,
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel": self.kernel,
            "stride": self.stride,
            "dilation": self.dilation,
            "groups": self.groups,
            "padding": self.padding,
        }
        if self.weight is not None:
            out["weight"] = self.weight
        if self.bias is not None:
            out["bias"] = self.bias
        return out

    @classmethod
    def from_json(cls, obj: Mapping, where: str = "layer") -> "LayerSpec":
        if not isinstance(obj, Mapping) or "kind" not in obj:
            raise FormatError(f"{where}: layer must be an object with a 'kind'")
        allowed = set(cls.__dataclass_fields__)
        unknown = set(obj) - allowed
        if unknown:
            raise FormatError(f"{where}: unknown layer fields {sorted(unknown)}")
        try:
            spec = cls(**obj)
        except TypeError as exc:
            raise FormatError(f"{where}: {exc}") from None
        spec.validate(where)
        return spec


def conv_tensor_names(spec: LayerSpec, disc: int, layer: int) -> tuple[str, str]:
    return (
        spec.weight or f"d{disc}.l{layer}.weight",
        spec.bias or f"d{disc}.l{layer}.bias",
    )


@dataclass(frozen=True, eq=False)
class DiscriminatorBundle:
    name: str
    discriminators: tuple[tuple[LayerSpec, ...], ...]
    inter_scale_pool: LayerSpec | None
    tensors: Mapping[str, np.ndarray]
    style: str | None = None
    sample_rate: int | None = None

    def __post_init__(self):
        frozen = {}
        for key, arr in self.tensors.items():
            arr = np.asarray(arr, dtype=np.float32)
            arr.setflags(write=False)
            frozen[key] = arr
        object.__setattr__(self, "tensors", MappingProxyType(frozen))
        object.__setattr__(
            self, "discriminators", tuple(tuple(layers) for layers in self.discriminators)
        )
        self.validate()

    def validate(self) -> None:
        """Eager structural check; raises ValidationError naming the offending part."""
        if not self.discriminators:
            raise ValidationError(f"bundle {self.name!r} declares no discriminators")
        if self.style is not None:
            expected = STYLE_DISCRIMINATOR_COUNT.get(self.style)
            if expected is None:
                raise ValidationError(f"unknown bundle style {self.style!r}")
            if len(self.discriminators) != expected:
                raise ValidationError(
                    f"{self.style} bundle needs {expected} discriminator(s), got {len(self.discriminators)}"
                )
        if self.inter_scale_pool is not None:
            if self.inter_scale_pool.kind != "avg_pool1d":
                raise ValidationError("inter_scale_pool must be an avg_pool1d layer")
            self.inter_scale_pool.validate("inter_scale_pool")
        elif len(self.discriminators) > 1:
            raise ValidationError("multi-discriminator bundle needs an inter_scale_pool")

        for d, layers in enumerate(self.discriminators):
            if not layers:
                raise ValidationError(f"discriminator {d} has no layers")
            channels = 1
            for i, spec in enumerate(layers):
                where = f"discriminator {d} layer {i}"
                spec.validate(where)
                if spec.kind != "conv1d":
                    continue
                if spec.in_channels != channels:
                    raise ValidationError(
                        f"{where}: expects {spec.in_channels} input channels, receives {channels}"
                    )
                channels = spec.out_channels
                w_name, b_name = conv_tensor_names(spec, d, i)
                for tname, shape in ((w_name, spec.weight_shape), (b_name, (spec.out_channels,))):
                    if tname not in self.tensors:
                        raise ValidationError(f"{where}: missing tensor {tname!r}")
                    if tuple(self.tensors[tname].shape) != shape:
                        raise ValidationError(
                            f"tensor {tname!r}: shape {tuple(self.tensors[tname].shape)}, layer needs {shape}"
                        )
            if channels != 1:
                raise ValidationError(f"discriminator {d} ends with {channels} channels, need 1")

    def header(self) -> dict:
        hdr = {
            "name": self.name,
            "discriminators": [[s.to_json() for s in layers] for layers in self.discriminators],
            "inter_scale_pool": None if self.inter_scale_pool is None else self.inter_scale_pool.to_json(),
        }
        if self.style is not None:
            hdr["style"] = self.style
        if self.sample_rate is not None:
            hdr["sample_rate"] = self.sample_rate
        return hdr


def dumps_bundle(bundle: DiscriminatorBundle) -> bytes:
    header = bundle.header()
    entries = []
    blobs = []
    offset = 0
    for tname in sorted(bundle.tensors):
        arr = bundle.tensors[tname]
        entries.append({"name": tname, "shape": list(arr.shape), "offset": offset, "dtype": "f32"})
        blobs.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
        offset += arr.size
    header["tensors"] = entries
    raw = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<I", len(raw)) + raw + b"".join(blobs)


def save_bundle(path: str | Path, bundle: DiscriminatorBundle) -> None:
    Path(path).write_bytes(dumps_bundle(bundle))


def loads_bundle(data: bytes, source: str = "<bytes>") -> DiscriminatorBundle:
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError(f"{source}: bad magic, expected {MAGIC!r}")
    (hlen,) = struct.unpack("<I", data[4:8])
    if 8 + hlen > len(data):
        raise FormatError(f"{source}: header length {hlen} exceeds file size")
    try:
        header = json.loads(data[8:8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{source}: unreadable JSON header ({exc})") from None
    if not isinstance(header, dict):
        raise FormatError(f"{source}: header must be a JSON object")
    for key in ("name", "discriminators", "tensors"):
        if key not in header:
            raise FormatError(f"{source}: header lacks {key!r}")

    blob = np.frombuffer(data[8 + hlen:][: (len(data) - 8 - hlen) // 4 * 4], dtype="<f4")
    tensors = {}
    for entry in header["tensors"]:
        try:
            tname, shape, offset = entry["name"], tuple(int(s) for s in entry["shape"]), int(entry["offset"])
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{source}: malformed tensor entry {entry!r}") from None
        if entry.get("dtype", "f32") != "f32":
            raise FormatError(f"{source}: tensor {tname!r} has dtype {entry.get('dtype')!r}, only f32 supported")
        size = math.prod(shape)
        if offset < 0 or offset + size > blob.size:
            raise ValidationError(
                f"tensor {tname!r}: declares {size} values at offset {offset}, blob holds {blob.size}"
            )
        tensors[tname] = blob[offset:offset + size].reshape(shape)

    discs = []
    for d, layers in enumerate(header["discriminators"]):
        discs.append(tuple(LayerSpec.from_json(obj, f"discriminator {d} layer {i}") for i, obj in enumerate(layers)))
    pool = header.get("inter_scale_pool")
    return DiscriminatorBundle(
        name=str(header["name"]),
        discriminators=tuple(discs),
        inter_scale_pool=None if pool is None else LayerSpec.from_json(pool, "inter_scale_pool"),
        tensors=tensors,
        style=header.get("style"),
        sample_rate=header.get("sample_rate"),
    )


def load_bundle(path: str | Path) -> DiscriminatorBundle:
    return loads_bundle(Path(path).read_bytes(), str(path))
