"""Feedforward ReLU networks: representation, evaluation, and file loaders.

Supported inputs are a canonical JSON document and the NNet text convention.
Networks are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MalformedModel, NonFiniteWeight


class Activation(enum.Enum):
    RELU = "relu"
    IDENTITY = "identity"


@dataclass(frozen=True)
class AffineLayer:
    """One dense layer: y = act(W x + b), with W of shape (rows, cols)."""

    weights: np.ndarray
    biases: np.ndarray
    activation: Activation

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.biases, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] == 0 or w.shape[1] == 0:
            raise MalformedModel(f"weight matrix must be 2-d and non-empty, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise DimensionMismatch(
                f"bias length {b.shape} does not match {w.shape[0]} output rows")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise NonFiniteWeight("layer contains NaN or infinite entries")
        w = w.copy()
        b = b.copy()
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class Network:
    """A stack of affine layers, ReLU on hidden layers, identity on the last."""

    layers: tuple[AffineLayer, ...]
    input_size: int = field(init=False)
    output_size: int = field(init=False)
    max_layer_size: int = field(init=False)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise MalformedModel("network has no layers")
        for i, layer in enumerate(layers):
            expect = layers[i - 1].rows if i > 0 else layer.cols
            if layer.cols != expect:
                raise DimensionMismatch(
                    f"layer {i} expects {layer.cols} inputs but previous layer emits {expect}")
            want = Activation.IDENTITY if i == len(layers) - 1 else Activation.RELU
            if layer.activation is not want:
                raise MalformedModel(
                    f"layer {i} must use {want.value}, got {layer.activation.value}")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "input_size", layers[0].cols)
        object.__setattr__(self, "output_size", layers[-1].rows)
        object.__setattr__(self, "max_layer_size", max(l.rows for l in layers))

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(l.rows for l in self.layers[:-1])

    @property
    def n_hidden_nodes(self) -> int:
        return sum(self.hidden_sizes)

    def forward(self, x) -> np.ndarray:
        """Concrete evaluation at a single point."""
        v = np.asarray(x, dtype=np.float64)
        if v.shape != (self.input_size,):
            raise DimensionMismatch(
                f"input has shape {v.shape}, network expects ({self.input_size},)")
        if not np.all(np.isfinite(v)):
            raise DimensionMismatch("input contains non-finite coordinates")
        for layer in self.layers:
            v = layer.weights @ v + layer.biases
            if layer.activation is Activation.RELU:
                v = np.maximum(v, 0.0)
        return v

    def forward_batch(self, X) -> np.ndarray:
        """Concrete evaluation of a (batch, input_size) array of points."""
        V = np.asarray(X, dtype=np.float64)
        if V.ndim != 2 or V.shape[1] != self.input_size:
            raise DimensionMismatch(
                f"batch has shape {V.shape}, expected (n, {self.input_size})")
        for layer in self.layers:
            V = V @ layer.weights.T + layer.biases
            if layer.activation is Activation.RELU:
                V = np.maximum(V, 0.0)
        return V


def _parse_activation(name) -> Activation:
    try:
        return Activation(name)
    except ValueError:
        raise MalformedModel(f"unknown activation {name!r}") from None


def load_json(path) -> Network:
    """Load a network from the canonical JSON model document.

    The document is {"input_size": int, "layers": [{"weights": [[...]],
    "biases": [...], "activation": "relu"|"identity"}, ...]} with weights
    row-major: weights[i][j] multiplies input j into output i.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedModel(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "layers" not in doc:
        raise MalformedModel("model document must be an object with a 'layers' array")
    raw_layers = doc["layers"]
    if not isinstance(raw_layers, list) or not raw_layers:
        raise MalformedModel("'layers' must be a non-empty array")
    layers = []
    for i, entry in enumerate(raw_layers):
        if not isinstance(entry, dict):
            raise MalformedModel(f"layer {i} is not an object")
        try:
            w, b, act = entry["weights"], entry["biases"], entry["activation"]
        except KeyError as exc:
            raise MalformedModel(f"layer {i} missing field {exc}") from None
        try:
            w = np.array(w, dtype=np.float64)
            b = np.array(b, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise MalformedModel(f"layer {i} has non-numeric entries: {exc}") from None
        if w.ndim != 2:
            raise MalformedModel(f"layer {i} weights must be a matrix (list of equal-length rows)")
        layers.append(AffineLayer(w, b, _parse_activation(act)))
    net = Network(tuple(layers))
    declared = doc.get("input_size")
    if declared is not None and declared != net.input_size:
        raise DimensionMismatch(
            f"declared input_size {declared} but first layer takes {net.input_size}")
    return net


def save_json(net: Network, path) -> None:
    """Write the canonical JSON model document. Round-trips bit-exactly."""
    doc = {
        "input_size": net.input_size,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "biases": layer.biases.tolist(),
                "activation": layer.activation.value,
            }
            for layer in net.layers
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _nnet_values(line: str) -> list[float]:
    parts = [p.strip() for p in line.split(",")]
    vals = []
    for p in parts:
        if p == "":
            continue
        try:
            vals.append(float(p))
        except ValueError:
            raise MalformedModel(f"non-numeric NNet field {p!r}") from None
    return vals


def load_nnet(path) -> Network:
    """Load a network from an NNet text file.

    Layout: "//" comment lines; a header line with numLayers, inputSize,
    outputSize, maxLayerSize; a layer-sizes line; five normalization lines
    (parsed past but discarded, so weights stay in raw coordinates); then per
    layer, one comma-separated row per output node followed by one bias line
    per output node.
    """
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    body = [ln for ln in lines if not ln.lstrip().startswith("//")]
    body = [ln for ln in body if ln.strip() != ""]
    it = iter(body)

    def next_line(what):
        try:
            return next(it)
        except StopIteration:
            raise MalformedModel(f"NNet file truncated: missing {what}") from None

    header = _nnet_values(next_line("header counts"))
    if len(header) < 4:
        raise MalformedModel("NNet header must hold numLayers, inputSize, outputSize, maxLayerSize")
    n_layers, in_size, out_size, max_size = (int(v) for v in header[:4])
    sizes = [int(v) for v in _nnet_values(next_line("layer sizes"))]
    if len(sizes) != n_layers + 1:
        raise MalformedModel(f"expected {n_layers + 1} layer sizes, got {len(sizes)}")
    if sizes[0] != in_size or sizes[-1] != out_size:
        raise DimensionMismatch("layer-sizes line disagrees with header input/output sizes")
    for what in ("flag line", "input minimums", "input maximums", "means", "ranges"):
        next_line(what)

    layers = []
    for li in range(n_layers):
        rows, cols = sizes[li + 1], sizes[li]
        w = np.empty((rows, cols), dtype=np.float64)
        for r in range(rows):
            vals = _nnet_values(next_line(f"layer {li} weight row {r}"))
            if len(vals) != cols:
                raise DimensionMismatch(
                    f"layer {li} weight row {r} has {len(vals)} entries, expected {cols}")
            w[r] = vals
        b = np.empty(rows, dtype=np.float64)
        for r in range(rows):
            vals = _nnet_values(next_line(f"layer {li} bias {r}"))
            if len(vals) != 1:
                raise MalformedModel(f"layer {li} bias line {r} must hold one value")
            b[r] = vals[0]
        act = Activation.IDENTITY if li == n_layers - 1 else Activation.RELU
        layers.append(AffineLayer(w, b, act))

    # header maxLayerSize (and the normalization block) are advisory; the
    # Network recomputes its own max on construction
    del max_size
    return Network(tuple(layers))
