"""Continuous piecewise-affine network model.

A network is an ordered list of ops: dense affine maps, element-wise
two-slope activations sigma(t) = a*t for t > 0 and b*t for t <= 0,
inference-mode batch norm (a per-channel affine map), dense-lowered 2D
convolutions, and residual begin/end markers that add the block input
back onto the block output.  The final op must be affine.

Everything the enumerator needs is derived here: forward evaluation,
pre-activation sign patterns (sign of 0 is -1), and the effective affine
map (W, b) realized on the region around a reference point, obtained by
propagating (W, b) through the op list with the activation slopes frozen
at the reference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Hyperplane

__all__ = [
    "LayerSpec",
    "Network",
    "EffectiveAffine",
    "StructuralError",
    "NumericOverflowError",
    "dense",
    "activation",
    "relu",
    "batchnorm",
    "residual_begin",
    "residual_end",
    "forward",
    "preactivations",
    "sign_pattern",
    "sign_patterns",
    "effective_affine",
    "effective_output",
    "layer_hyperplanes",
    "fold_batchnorm",
    "lower_conv",
    "slice_network",
    "network_from_json",
    "network_to_json",
    "load_network",
    "save_network",
]

_ZERO_ROW = 1e-12


class StructuralError(ValueError):
    """The layer list violates the network structure contract."""


class NumericOverflowError(FloatingPointError):
    """A forward pass produced non-finite values."""


def _freeze(a: np.ndarray | None) -> np.ndarray | None:
    if a is None:
        return None
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LayerSpec:
    """One op in the network.  Which fields are set depends on `kind`:

    dense / flattened_conv : weight (d_out x d_in), bias (d_out)
    activation             : slope_pos (a), slope_neg (b)
    batchnorm              : scale, shift (per channel, frozen statistics)
    residual_begin / _end  : no parameters
    """

    kind: str
    weight: np.ndarray | None = None
    bias: np.ndarray | None = None
    slope_pos: float | None = None
    slope_neg: float | None = None
    scale: np.ndarray | None = None
    shift: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "weight", _freeze(self.weight))
        object.__setattr__(self, "bias", _freeze(self.bias))
        object.__setattr__(self, "scale", _freeze(self.scale))
        object.__setattr__(self, "shift", _freeze(self.shift))
        if self.kind in ("dense", "flattened_conv"):
            if self.weight is None or self.weight.ndim != 2:
                raise StructuralError(f"{self.kind} layer needs a 2D weight matrix")
            if self.bias is None or self.bias.shape != (self.weight.shape[0],):
                raise StructuralError(f"{self.kind} bias shape mismatch")
            if not (np.all(np.isfinite(self.weight)) and np.all(np.isfinite(self.bias))):
                raise StructuralError("non-finite layer parameters")
        elif self.kind == "activation":
            if self.slope_pos is None or self.slope_neg is None:
                raise StructuralError("activation layer needs both slopes")
            if not (np.isfinite(self.slope_pos) and np.isfinite(self.slope_neg)):
                raise StructuralError("activation slopes must be finite")
        elif self.kind == "batchnorm":
            if self.scale is None or self.shift is None or self.scale.shape != self.shift.shape:
                raise StructuralError("batchnorm needs matching scale and shift vectors")
            if not (np.all(np.isfinite(self.scale)) and np.all(np.isfinite(self.shift))):
                raise StructuralError("non-finite batchnorm parameters")
        elif self.kind not in ("residual_begin", "residual_end"):
            raise StructuralError(f"unknown layer kind {self.kind!r}")


def dense(weight, bias) -> LayerSpec:
    return LayerSpec("dense", weight=np.atleast_2d(weight), bias=np.atleast_1d(bias))


def activation(slope_pos: float = 1.0, slope_neg: float = 0.0) -> LayerSpec:
    return LayerSpec("activation", slope_pos=float(slope_pos), slope_neg=float(slope_neg))


def relu() -> LayerSpec:
    return activation(1.0, 0.0)


def batchnorm(scale, shift) -> LayerSpec:
    return LayerSpec("batchnorm", scale=np.atleast_1d(scale), shift=np.atleast_1d(shift))


def residual_begin() -> LayerSpec:
    return LayerSpec("residual_begin")


def residual_end() -> LayerSpec:
    return LayerSpec("residual_end")


class Network:
    """Immutable op list with validated dimension chaining.

    `activation_layer_indices` lists the positions of activation ops; the
    enumerator's notion of depth is an index into that list.
    """

    __slots__ = ("input_dim", "layers", "activation_layer_indices", "activation_widths", "output_dim")

    def __init__(self, input_dim: int, layers: Sequence[LayerSpec]):
        input_dim = int(input_dim)
        if input_dim <= 0:
            raise StructuralError("input_dim must be positive")
        layers = tuple(layers)
        if not layers:
            raise StructuralError("network needs at least one layer")
        if layers[-1].kind == "activation":
            raise StructuralError("final layer must be affine, not an activation")

        width = input_dim
        skip_dims: list[int] = []
        act_indices: list[int] = []
        act_widths: list[int] = []
        for i, layer in enumerate(layers):
            if layer.kind in ("dense", "flattened_conv"):
                if layer.weight.shape[1] != width:
                    raise StructuralError(
                        f"layer {i}: weight expects input {layer.weight.shape[1]}, got {width}"
                    )
                width = layer.weight.shape[0]
            elif layer.kind == "batchnorm":
                if layer.scale.shape != (width,):
                    raise StructuralError(f"layer {i}: batchnorm width mismatch")
            elif layer.kind == "activation":
                act_indices.append(i)
                act_widths.append(width)
            elif layer.kind == "residual_begin":
                skip_dims.append(width)
            elif layer.kind == "residual_end":
                if not skip_dims:
                    raise StructuralError(f"layer {i}: residual_end without matching begin")
                skip = skip_dims.pop()
                if skip != width:
                    raise StructuralError(
                        f"layer {i}: residual block maps width {skip} to {width}; skip needs equal dims"
                    )
        if skip_dims:
            raise StructuralError("unclosed residual block")

        self.input_dim = input_dim
        self.layers = layers
        self.activation_layer_indices = tuple(act_indices)
        self.activation_widths = tuple(act_widths)
        self.output_dim = width

    @property
    def n_activation_layers(self) -> int:
        return len(self.activation_layer_indices)

    @property
    def total_activation_neurons(self) -> int:
        return sum(self.activation_widths)

    def __repr__(self) -> str:
        return (
            f"Network(d0={self.input_dim}, act_widths={list(self.activation_widths)}, "
            f"d_out={self.output_dim})"
        )


@dataclass(frozen=True)
class EffectiveAffine:
    """Affine map x -> W x + b realized on a fixed activation pattern."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "W", _freeze(self.W))
        object.__setattr__(self, "b", _freeze(self.b))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.W @ x + self.b
        return x @ self.W.T + self.b


# -- evaluation ----------------------------------------------------------------


def _apply(layer: LayerSpec, z: np.ndarray) -> np.ndarray:
    if layer.kind in ("dense", "flattened_conv"):
        return z @ layer.weight.T + layer.bias
    if layer.kind == "batchnorm":
        return z * layer.scale + layer.shift
    if layer.kind == "activation":
        return np.where(z > 0.0, layer.slope_pos * z, layer.slope_neg * z)
    raise AssertionError(layer.kind)


def forward(net: Network, x: np.ndarray) -> np.ndarray:
    """Feedforward evaluation; accepts a point (d0,) or a batch (n, d0)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    z = x[None, :] if single else x
    if z.shape[-1] != net.input_dim:
        raise ValueError(f"input width {z.shape[-1]} != network input_dim {net.input_dim}")
    stack: list[np.ndarray] = []
    with np.errstate(over="ignore", invalid="ignore"):
        for layer in net.layers:
            if layer.kind == "residual_begin":
                stack.append(z)
            elif layer.kind == "residual_end":
                z = z + stack.pop()
            else:
                z = _apply(layer, z)
    if not np.all(np.isfinite(z)):
        raise NumericOverflowError("forward pass produced non-finite values")
    return z[0] if single else z


def preactivations(net: Network, x: np.ndarray, depth: int | None = None) -> list[np.ndarray]:
    """Pre-activation vectors of the first `depth` activation layers."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    z = x[None, :] if single else x
    depth = net.n_activation_layers if depth is None else depth
    out: list[np.ndarray] = []
    stack: list[np.ndarray] = []
    for layer in net.layers:
        if layer.kind == "residual_begin":
            stack.append(z)
            continue
        if layer.kind == "residual_end":
            z = z + stack.pop()
            continue
        if layer.kind == "activation":
            out.append(z[0] if single else z)
            if len(out) == depth:
                return out
        z = _apply(layer, z)
    return out


def sign_pattern(net: Network, x: np.ndarray, depth: int | None = None) -> tuple[int, ...]:
    """Concatenated pre-activation signs up to `depth` activation layers.

    Sign of a zero pre-activation is -1.
    """
    bits: list[int] = []
    for z in preactivations(net, x, depth):
        bits.extend(np.where(z > 0.0, 1, -1).tolist())
    return tuple(bits)


def sign_patterns(net: Network, X: np.ndarray, depth: int | None = None) -> np.ndarray:
    """Batch variant: int8 matrix (n_points, n_neurons up to depth)."""
    cols = [np.where(z > 0.0, 1, -1).astype(np.int8) for z in preactivations(net, X, depth)]
    return np.concatenate(cols, axis=1)


# -- effective affine compilation ------------------------------------------------


def effective_affine(net: Network, ref: np.ndarray, layer: int) -> EffectiveAffine:
    """Affine map of stage `layer` on the region containing `ref`.

    Stages 1..n_act give the pre-activation of the corresponding
    activation layer; stage n_act + 1 gives the full network output.
    The map is exact on the whole region whose sign pattern (up to the
    stage) matches that of `ref`: slopes are frozen at the reference and
    (W, b) pairs are pushed through the op list, with residual ends
    adding the saved skip map back on.
    """
    ref = np.asarray(ref, dtype=float)
    n_act = net.n_activation_layers
    if not 1 <= layer <= n_act + 1:
        raise ValueError(f"stage {layer} out of range 1..{n_act + 1}")
    W = np.eye(net.input_dim)
    b = np.zeros(net.input_dim)
    stack: list[tuple[np.ndarray, np.ndarray]] = []
    seen_act = 0
    for spec in net.layers:
        if spec.kind == "residual_begin":
            stack.append((W, b))
        elif spec.kind == "residual_end":
            Ws, bs = stack.pop()
            W = W + Ws
            b = b + bs
        elif spec.kind in ("dense", "flattened_conv"):
            W = spec.weight @ W
            b = spec.weight @ b + spec.bias
        elif spec.kind == "batchnorm":
            W = spec.scale[:, None] * W
            b = spec.scale * b + spec.shift
        else:  # activation
            seen_act += 1
            if seen_act == layer:
                return EffectiveAffine(W, b)
            v = W @ ref + b
            gamma = np.where(v > 0.0, spec.slope_pos, spec.slope_neg)
            W = gamma[:, None] * W
            b = gamma * b
    return EffectiveAffine(W, b)


def effective_output(net: Network, ref: np.ndarray) -> EffectiveAffine:
    """Affine map of the network output on the region containing `ref`."""
    return effective_affine(net, ref, net.n_activation_layers + 1)


def layer_hyperplanes(
    net: Network, ref: np.ndarray, layer: int
) -> tuple[list[tuple[int, Hyperplane]], list[tuple[int, int]]]:
    """Neuron hyperplanes of activation stage `layer` around `ref`.

    Returns (hyperplanes, fixed): hyperplanes as (neuron index, Hyperplane)
    for rows with nonzero effective weight, and fixed as (neuron index,
    sign) for zero rows, whose pre-activation is the constant bias and
    whose sign is therefore +1 for positive bias and -1 otherwise.
    """
    eff = effective_affine(net, ref, layer)
    planes: list[tuple[int, Hyperplane]] = []
    fixed: list[tuple[int, int]] = []
    for i in range(eff.W.shape[0]):
        row = eff.W[i]
        if np.linalg.norm(row) <= _ZERO_ROW:
            fixed.append((i, 1 if eff.b[i] > 0.0 else -1))
        else:
            planes.append((i, Hyperplane(row, float(eff.b[i]))))
    return planes, fixed


# -- structural transforms -------------------------------------------------------


def fold_batchnorm(net: Network) -> Network:
    """Merge every batchnorm into an adjacent dense layer.

    Prefers the preceding dense (scale rows, fold shift into bias), falls
    back to the following dense; residual markers block adjacency.  The
    folded network computes the same function.
    """
    layers = list(net.layers)
    out: list[LayerSpec] = []
    i = 0
    while i < len(layers):
        spec = layers[i]
        if spec.kind != "batchnorm":
            out.append(spec)
            i += 1
            continue
        prev = out[-1] if out else None
        nxt = layers[i + 1] if i + 1 < len(layers) else None
        if prev is not None and prev.kind in ("dense", "flattened_conv"):
            out[-1] = LayerSpec(
                "dense",
                weight=spec.scale[:, None] * prev.weight,
                bias=spec.scale * prev.bias + spec.shift,
            )
            i += 1
        elif nxt is not None and nxt.kind in ("dense", "flattened_conv"):
            out.append(
                LayerSpec(
                    "dense",
                    weight=nxt.weight * spec.scale[None, :],
                    bias=nxt.weight @ spec.shift + nxt.bias,
                )
            )
            i += 2
        else:
            raise StructuralError("batchnorm is not adjacent to a dense layer")
    return Network(net.input_dim, out)


def lower_conv(
    weight: np.ndarray,
    bias: np.ndarray | None,
    in_shape: tuple[int, int, int],
    stride: int = 1,
    padding: int = 0,
) -> LayerSpec:
    """Dense lowering of a 2D convolution at toy scale.

    `weight` has shape (c_out, c_in, kh, kw); the input is a flattened
    (c_in, H, W) tensor in channel-major order, and the output flattens
    (c_out, H_out, W_out) the same way.  Zero padding, square stride.
    """
    weight = np.asarray(weight, dtype=float)
    if weight.ndim != 4:
        raise StructuralError("conv weight must have shape (c_out, c_in, kh, kw)")
    c_out, c_in, kh, kw = weight.shape
    C, H, W = in_shape
    if C != c_in:
        raise StructuralError(f"conv expects {c_in} input channels, input shape has {C}")
    h_out = (H + 2 * padding - kh) // stride + 1
    w_out = (W + 2 * padding - kw) // stride + 1
    if h_out <= 0 or w_out <= 0:
        raise StructuralError("convolution output would be empty")
    bias = np.zeros(c_out) if bias is None else np.asarray(bias, dtype=float)

    M = np.zeros((c_out * h_out * w_out, c_in * H * W))
    bvec = np.zeros(c_out * h_out * w_out)
    for co in range(c_out):
        for oy in range(h_out):
            for ox in range(w_out):
                out_idx = (co * h_out + oy) * w_out + ox
                bvec[out_idx] = bias[co]
                for ci in range(c_in):
                    for ky in range(kh):
                        for kx in range(kw):
                            iy = oy * stride + ky - padding
                            ix = ox * stride + kx - padding
                            if 0 <= iy < H and 0 <= ix < W:
                                in_idx = (ci * H + iy) * W + ix
                                M[out_idx, in_idx] = weight[co, ci, ky, kx]
    return LayerSpec("flattened_conv", weight=M, bias=bvec)


def slice_network(net: Network, base: np.ndarray, dir1: np.ndarray, dir2: np.ndarray) -> Network:
    """Restrict the network to the plane x = base + t1*dir1 + t2*dir2.

    The affine embedding is composed into the first dense layer when
    possible, so a plain MLP slices to another plain MLP with input_dim 2.
    Raises ValueError for linearly dependent directions.
    """
    base = np.asarray(base, dtype=float)
    E = np.column_stack([np.asarray(dir1, dtype=float), np.asarray(dir2, dtype=float)])
    if base.shape != (net.input_dim,) or E.shape != (net.input_dim, 2):
        raise ValueError("base/dir vectors must have length input_dim")
    if np.linalg.matrix_rank(E, tol=1e-10) < 2:
        raise ValueError("slice directions are linearly dependent")
    first = net.layers[0]
    if first.kind in ("dense", "flattened_conv"):
        merged = LayerSpec("dense", weight=first.weight @ E, bias=first.weight @ base + first.bias)
        return Network(2, (merged,) + net.layers[1:])
    embed = LayerSpec("dense", weight=E, bias=base)
    return Network(2, (embed,) + net.layers)


# -- interchange format -----------------------------------------------------------


def _layers_from_json(items: list) -> list[LayerSpec]:
    out: list[LayerSpec] = []
    for item in items:
        kind = item.get("kind")
        if kind == "dense":
            out.append(dense(np.asarray(item["W"], dtype=float), np.asarray(item["b"], dtype=float)))
        elif kind == "activation":
            out.append(activation(float(item["a"]), float(item["b"])))
        elif kind == "batchnorm":
            out.append(batchnorm(np.asarray(item["scale"], dtype=float), np.asarray(item["shift"], dtype=float)))
        elif kind == "residual":
            out.append(residual_begin())
            out.extend(_layers_from_json(item["body"]))
            out.append(residual_end())
        elif kind == "conv2d":
            shape = item["shape"]
            out.append(
                lower_conv(
                    np.asarray(item["weight"], dtype=float),
                    np.asarray(item["bias"], dtype=float) if "bias" in item else None,
                    (int(shape["in_channels"]), int(shape["height"]), int(shape["width"])),
                    stride=int(shape.get("stride", 1)),
                    padding=int(shape.get("padding", 0)),
                )
            )
        else:
            raise StructuralError(f"unknown layer kind in document: {kind!r}")
    return out


def network_from_json(obj: dict) -> Network:
    """Parse the interchange document; folds batch norm eagerly and lowers
    conv2d layers to dense matrices, so the result is made of dense,
    activation and residual ops only."""
    try:
        input_dim = int(obj["input_dim"])
        items = obj["layers"]
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"network document missing field: {exc}") from exc
    net = Network(input_dim, _layers_from_json(items))
    if any(l.kind == "batchnorm" for l in net.layers):
        net = fold_batchnorm(net)
    return net


def _layers_to_json(layers: Sequence[LayerSpec]) -> list:
    items: list = []
    stack: list[list] = [items]
    for spec in layers:
        if spec.kind == "residual_begin":
            body: list = []
            stack[-1].append({"kind": "residual", "body": body})
            stack.append(body)
        elif spec.kind == "residual_end":
            stack.pop()
        elif spec.kind in ("dense", "flattened_conv"):
            stack[-1].append({"kind": "dense", "W": spec.weight.tolist(), "b": spec.bias.tolist()})
        elif spec.kind == "activation":
            stack[-1].append({"kind": "activation", "a": spec.slope_pos, "b": spec.slope_neg})
        elif spec.kind == "batchnorm":
            stack[-1].append({"kind": "batchnorm", "scale": spec.scale.tolist(), "shift": spec.shift.tolist()})
    return items


def network_to_json(net: Network) -> dict:
    return {"input_dim": net.input_dim, "layers": _layers_to_json(net.layers)}


def load_network(path) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        return network_from_json(json.load(fh))


def save_network(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_json(net), fh)
