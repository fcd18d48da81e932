"""Model state for the compact CNN: layer specs, parameters, checkpoints.

A model is an ordered list of layer specs plus one parameter dict per
parametric layer. The default architecture for side-S grayscale inputs is
conv(8,3x3,pad 1) - relu - maxpool(2,2) - conv(16,3x3,pad 1) - relu -
maxpool(2,2) - flatten - dense(64) - relu - dense(2) - softmax.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import IoFailure, NonFiniteGradient, ShapeMismatch
from ..imaging import DnaImage
from ..metrics import LABEL_BOT, LABEL_HUMAN
from . import ops

CHECKPOINT_MAGIC = b"BDNACKPT"
CHECKPOINT_VERSION = 1

#: Class index of the bot class in the two-logit head.
BOT_CLASS = 1


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv | relu | pool | flatten | dense | softmax
    filters: int = 0
    kernel: int = 0
    stride: int = 1
    padding: int = 0
    pool_mode: str = "max"
    window: int = 0
    out_units: int = 0

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "conv":
            out.update(filters=self.filters, kernel=self.kernel,
                       stride=self.stride, padding=self.padding)
        elif self.kind == "pool":
            out.update(pool_mode=self.pool_mode, window=self.window,
                       stride=self.stride)
        elif self.kind == "dense":
            out.update(out_units=self.out_units)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LayerSpec":
        return cls(**data)


def conv(filters: int, kernel: int = 3, stride: int = 1, padding: int = 0) -> LayerSpec:
    return LayerSpec(kind="conv", filters=filters, kernel=kernel,
                     stride=stride, padding=padding)


def pool(mode: str = "max", window: int = 2, stride: int = 2) -> LayerSpec:
    return LayerSpec(kind="pool", pool_mode=mode, window=window, stride=stride)


def dense(out_units: int) -> LayerSpec:
    return LayerSpec(kind="dense", out_units=out_units)


def relu() -> LayerSpec:
    return LayerSpec(kind="relu")


def flatten() -> LayerSpec:
    return LayerSpec(kind="flatten")


def softmax_layer() -> LayerSpec:
    return LayerSpec(kind="softmax")


def default_layer_specs() -> list[LayerSpec]:
    return [
        conv(8, 3, stride=1, padding=1), relu(), pool("max", 2, 2),
        conv(16, 3, stride=1, padding=1), relu(), pool("max", 2, 2),
        flatten(), dense(64), relu(), dense(2), softmax_layer(),
    ]


@dataclass
class ModelState:
    specs: list[LayerSpec]
    params: list[dict[str, np.ndarray]]  # parallel to specs; {} for no params
    input_side: int
    dtype: np.dtype = field(default_factory=lambda: np.dtype(np.float32))
    seed: int = 0

    def parameter_arrays(self) -> list[tuple[str, np.ndarray]]:
        """Flat (name, array) view over all parameters, stable order."""
        out = []
        for i, p in enumerate(self.params):
            for key in sorted(p):
                out.append((f"layer{i}.{key}", p[key]))
        return out

    def copy_params(self) -> list[dict[str, np.ndarray]]:
        return [{k: v.copy() for k, v in p.items()} for p in self.params]

    def set_params(self, params: list[dict[str, np.ndarray]]) -> None:
        self.params = [{k: v.copy() for k, v in p.items()} for p in params]


def _layer_shapes(specs: list[LayerSpec], input_side: int) -> list[tuple]:
    """Output shape (C, H, W) or (units,) after every layer."""
    shape: tuple = (1, input_side, input_side)
    shapes = []
    for spec in specs:
        if spec.kind == "conv":
            c, h, w = shape
            ho = ops._out_dim(h, spec.kernel, spec.stride, spec.padding)
            wo = ops._out_dim(w, spec.kernel, spec.stride, spec.padding)
            shape = (spec.filters, ho, wo)
        elif spec.kind == "pool":
            c, h, w = shape
            ho = ops._out_dim(h, spec.window, spec.stride)
            wo = ops._out_dim(w, spec.window, spec.stride)
            shape = (c, ho, wo)
        elif spec.kind == "flatten":
            shape = (int(np.prod(shape)),)
        elif spec.kind == "dense":
            if len(shape) != 1:
                raise ShapeMismatch("dense layer needs flattened input")
            shape = (spec.out_units,)
        elif spec.kind in ("relu", "softmax"):
            pass
        else:
            raise ValueError(f"unknown layer kind '{spec.kind}'")
        shapes.append(shape)
    return shapes


def init_model(specs: list[LayerSpec], input_side: int, seed: int = 0,
               dtype=np.float32) -> ModelState:
    """He-style scaled normal init for conv/dense weights, zero biases."""
    if specs[-1].kind != "softmax":
        raise ValueError("model must end with a softmax layer")
    shapes = _layer_shapes(specs, input_side)
    if shapes[-1] != (2,):
        raise ShapeMismatch(f"final layer must emit 2 class logits, got {shapes[-1]}")
    rng = np.random.default_rng(seed)
    dtype = np.dtype(dtype)
    params: list[dict[str, np.ndarray]] = []
    in_shape: tuple = (1, input_side, input_side)
    for spec, out_shape in zip(specs, shapes):
        if spec.kind == "conv":
            c = in_shape[0]
            fan_in = c * spec.kernel * spec.kernel
            w = rng.normal(0.0, np.sqrt(2.0 / fan_in),
                           size=(spec.filters, c, spec.kernel, spec.kernel))
            params.append({"weight": w.astype(dtype),
                           "bias": np.zeros(spec.filters, dtype=dtype)})
        elif spec.kind == "dense":
            fan_in = in_shape[0]
            w = rng.normal(0.0, np.sqrt(2.0 / fan_in),
                           size=(spec.out_units, fan_in))
            params.append({"weight": w.astype(dtype),
                           "bias": np.zeros(spec.out_units, dtype=dtype)})
        else:
            params.append({})
        in_shape = out_shape
    return ModelState(specs=list(specs), params=params, input_side=input_side,
                      dtype=dtype, seed=seed)


def forward(model: ModelState, x: np.ndarray, keep_caches: bool = False):
    """Run a batch (N, 1, S, S) through the network.

    Returns (probs, caches); caches hold the per-layer inputs needed by
    backward and are None unless requested.
    """
    if x.ndim != 4 or x.shape[2] != model.input_side or x.shape[3] != model.input_side:
        raise ShapeMismatch(
            f"expected (N, 1, {model.input_side}, {model.input_side}), got {x.shape}"
        )
    out = x.astype(model.dtype, copy=False)
    caches: list = []
    for spec, p in zip(model.specs, model.params):
        cache_entry = out if keep_caches else None
        if spec.kind == "conv":
            out = ops.conv2d_forward(out, p["weight"], p["bias"],
                                     spec.stride, spec.padding)
        elif spec.kind == "relu":
            out = ops.relu(out)
        elif spec.kind == "pool":
            out = ops.pool2d(out, spec.pool_mode, spec.window, spec.stride)
        elif spec.kind == "flatten":
            out = out.reshape(out.shape[0], -1)
        elif spec.kind == "dense":
            out = ops.dense_forward(out, p["weight"], p["bias"])
        elif spec.kind == "softmax":
            out = ops.softmax(out)
        caches.append(cache_entry)
    return out, (caches if keep_caches else None)


def backward(model: ModelState, caches: list, probs: np.ndarray,
             y: np.ndarray) -> list[dict[str, np.ndarray]]:
    """Mean-cross-entropy gradients for every parameter, shaped like them.

    Raises NonFiniteGradient naming the layer if any gradient is NaN/inf.
    """
    grads: list[dict[str, np.ndarray]] = [dict() for _ in model.specs]
    if model.specs[-1].kind != "softmax":
        raise ValueError("backward assumes a softmax final layer")
    delta = ops.softmax_cross_entropy_grad(probs, y).astype(model.dtype)
    for i in range(len(model.specs) - 2, -1, -1):
        spec, p, x_in = model.specs[i], model.params[i], caches[i]
        if spec.kind == "conv":
            delta, dw, db = ops.conv2d_backward(delta, x_in, p["weight"],
                                                spec.stride, spec.padding)
            grads[i] = {"weight": dw, "bias": db}
        elif spec.kind == "relu":
            delta = ops.relu_backward(delta, x_in)
        elif spec.kind == "pool":
            delta = ops.pool2d_backward(delta, x_in, spec.pool_mode,
                                        spec.window, spec.stride)
        elif spec.kind == "flatten":
            delta = delta.reshape(x_in.shape)
        elif spec.kind == "dense":
            delta, dw, db = ops.dense_backward(delta, x_in, p["weight"])
            grads[i] = {"weight": dw, "bias": db}
        for key, g in grads[i].items():
            if not np.isfinite(g).all():
                raise NonFiniteGradient(
                    f"non-finite gradient in layer {i} ({spec.kind}) '{key}'"
                )
    return grads


@dataclass(frozen=True)
class Prediction:
    p_bot: float
    predicted_label: str

    @classmethod
    def from_probability(cls, p_bot: float) -> "Prediction":
        # Tie at exactly 0.5 goes to bot.
        label = LABEL_BOT if p_bot >= 0.5 else LABEL_HUMAN
        return cls(p_bot=float(p_bot), predicted_label=label)


def normalize_pixels(pixels: np.ndarray, dtype=np.float64) -> np.ndarray:
    """Map 8-bit intensities into [0, 1] network inputs."""
    return np.asarray(pixels, dtype=dtype) / 255.0


def predict_batch(model: ModelState, pixels: np.ndarray) -> np.ndarray:
    """Bot-class probabilities for a stack of images (N, S, S) of uint8."""
    x = normalize_pixels(pixels, model.dtype)[:, None, :, :]
    probs, _ = forward(model, x)
    return probs[:, BOT_CLASS]


def predict(model: ModelState, image: DnaImage) -> Prediction:
    """Classify one rendered image."""
    if image.side != model.input_side:
        raise ShapeMismatch(
            f"image side {image.side} does not match model input side "
            f"{model.input_side}"
        )
    p_bot = predict_batch(model, image.pixels[None, :, :])[0]
    return Prediction.from_probability(p_bot)


# ---------------------------------------------------------------------------
# Checkpoint format: magic, version, JSON header, raw little-endian tensors.
# ---------------------------------------------------------------------------

def save_checkpoint(model: ModelState, destination) -> bytes:
    """Serialize the model; returns the exact bytes written."""
    header = {
        "version": CHECKPOINT_VERSION,
        "input_side": model.input_side,
        "dtype": model.dtype.name,
        "seed": model.seed,
        "layers": [s.describe() for s in model.specs],
        "tensors": [
            {"name": name, "shape": list(arr.shape)}
            for name, arr in model.parameter_arrays()
        ],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    le = np.dtype(model.dtype).newbyteorder("<")
    body = b"".join(arr.astype(le).tobytes()
                    for _, arr in model.parameter_arrays())
    payload = (CHECKPOINT_MAGIC + struct.pack("<II", CHECKPOINT_VERSION, len(blob))
               + blob + body)
    path = Path(destination)
    try:
        path.write_bytes(payload)
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    return payload


def load_checkpoint(source) -> ModelState:
    path = Path(source)
    try:
        payload = path.read_bytes()
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    if payload[:8] != CHECKPOINT_MAGIC:
        raise IoFailure(path, ValueError("not a botdna checkpoint"))
    version, header_len = struct.unpack_from("<II", payload, 8)
    if version != CHECKPOINT_VERSION:
        raise IoFailure(path, ValueError(f"unsupported checkpoint version {version}"))
    header = json.loads(payload[16 : 16 + header_len])
    dtype = np.dtype(header["dtype"])
    specs = [LayerSpec.from_dict(d) for d in header["layers"]]
    offset = 16 + header_len
    le = dtype.newbyteorder("<")
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        arr = np.frombuffer(payload, dtype=le, count=count, offset=offset)
        tensors[entry["name"]] = arr.astype(dtype).reshape(entry["shape"])
        offset += count * le.itemsize
    params: list[dict[str, np.ndarray]] = [dict() for _ in specs]
    for name, arr in tensors.items():
        layer, key = name.split(".", 1)
        params[int(layer.removeprefix("layer"))][key] = arr
    return ModelState(specs=specs, params=params,
                      input_side=int(header["input_side"]), dtype=dtype,
                      seed=int(header.get("seed", 0)))
