import copy
import logging
from typing import Literal

import numpy as np

from ntk_lab.errors import ConfigurationError, ContractError, NumericError
from ntk_lab.linalg import Rng, init_weights
from .layers import Edge, Layer, Linear, Mode, MODES, Norm, ReLU

logger = logging.getLogger(__name__)

Readout = Literal["mean", "first"]
READOUTS = ("mean", "first")


class Network:
    """
    A feedforward DAG over vector-valued nodes.

    Node 0 holds the input, every other node is the sum of its incoming
    edges, and the last node holds the C logits. All trainable elements
    live in one flat vector ``params``; its canonical order is the edge
    list order, then layer order within each edge, then weight (out x in,
    row-major) before bias, and scale before shift for normalization.
    """

    def __init__(self, node_dims: list[int], edges: list[Edge], readout: Readout = "mean"):
        if readout not in READOUTS:
            raise ConfigurationError(f"Unknown readout: {readout!r} (expected one of {READOUTS})")
        self.node_dims = list(node_dims)
        self.edges = list(edges)
        self.readout = readout
        self._check_dims()

        offset = 0
        index = 0
        for edge in self.edges:
            for layer in edge.layers:
                layer.offset = offset
                layer.index = index
                offset += layer.size
                index += 1
        self.params = np.zeros(offset)
        for layer in self.layers:
            if isinstance(layer, Norm):
                layer.gamma(self.params)[:] = 1.0

        self._incoming: list[list[int]] = [[] for _ in self.node_dims]
        for e_idx, edge in enumerate(self.edges):
            self._incoming[edge.dst].append(e_idx)

    def _check_dims(self) -> None:
        if len(self.node_dims) < 2:
            raise ContractError("A network needs at least an input and an output node")
        for edge in self.edges:
            if not 0 <= edge.src < edge.dst < len(self.node_dims):
                raise ContractError(f"Edge {edge.src}->{edge.dst} is not forward")
            dim = self.node_dims[edge.src]
            for layer in edge.layers:
                if layer.in_dim != dim:
                    raise ContractError(
                        f"Layer {layer!r} on edge {edge.src}->{edge.dst} expects {layer.in_dim} inputs, gets {dim}"
                    )
                dim = layer.out_dim
            if dim != self.node_dims[edge.dst]:
                raise ContractError(
                    f"Edge {edge.src}->{edge.dst} produces {dim} features, node holds {self.node_dims[edge.dst]}"
                )

    @classmethod
    def sequential(
        cls,
        dims: list[int],
        bias: bool = True,
        activation: bool = True,
        readout: Readout = "mean",
    ) -> "Network":
        """A plain MLP ``dims[0] -> ... -> dims[-1]`` with ReLU between linear layers."""
        layers: list[Layer] = []
        for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
            layers.append(Linear(fan_in, fan_out, bias=bias))
            if activation and i < len(dims) - 2:
                layers.append(ReLU(fan_out))
        return cls([dims[0], dims[-1]], [Edge(0, 1, layers, "mlp")], readout)

    # ------------------------------------------------#

    @property
    def layers(self) -> list[Layer]:
        return [layer for edge in self.edges for layer in edge.layers]

    @property
    def input_dim(self) -> int:
        return self.node_dims[0]

    @property
    def output_dim(self) -> int:
        return self.node_dims[-1]

    @property
    def parameter_count(self) -> int:
        return int(self.params.size)

    @property
    def norm_layers(self) -> list[Norm]:
        return [layer for layer in self.layers if isinstance(layer, Norm)]

    def flatten(self) -> np.ndarray:
        return self.params.copy()

    def unflatten(self, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != self.params.shape:
            raise ContractError(f"Expected {self.params.size} parameters, got {vector.shape}")
        self.params[:] = vector

    def clone(self) -> "Network":
        return copy.deepcopy(self)

    def set_linear(self, layer_index: int, weight, bias=None) -> None:
        layer = self.layers[layer_index]
        if not isinstance(layer, Linear):
            raise ContractError(f"Layer {layer_index} is {layer!r}, not linear")
        layer.weight(self.params)[:] = np.asarray(weight, dtype=np.float64)
        if bias is not None:
            b = layer.bias_vector(self.params)
            if b is None:
                raise ContractError(f"Layer {layer_index} has no bias")
            b[:] = np.asarray(bias, dtype=np.float64)

    def initialize(self, scheme: str, rng: Rng, gaussian_std: float = 0.05) -> "Network":
        """Draws every linear weight from ``scheme``; biases and shifts stay zero, scales one."""
        for layer in self.layers:
            if isinstance(layer, Linear):
                weight = init_weights(
                    layer.in_dim, layer.out_dim, scheme, rng.child("layer", layer.index), gaussian_std
                )
                layer.weight(self.params)[:] = weight
                b = layer.bias_vector(self.params)
                if b is not None:
                    b[:] = 0.0
            elif isinstance(layer, Norm):
                layer.gamma(self.params)[:] = 1.0
                layer.beta(self.params)[:] = 0.0
        return self

    def readout_weights(self) -> np.ndarray:
        """Coefficients turning the C logits into the scalar readout."""
        c = self.output_dim
        if self.readout == "mean":
            return np.full(c, 1.0 / c)
        w = np.zeros(c)
        w[0] = 1.0
        return w

    # ------------------------------------------------#

    def run(self, xs: np.ndarray, mode: Mode = "eval", update_running: bool = False):
        """
        Forward pass over a batch. Returns the logits and the cache needed by
        ``backprop``.
        """
        if mode not in MODES:
            raise ConfigurationError(f"Unknown mode: {mode!r} (expected one of {MODES})")
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.input_dim:
            raise ContractError(f"Expected a batch of {self.input_dim}-vectors, got shape {xs.shape}")
        batch = xs.shape[0]
        values: list[np.ndarray] = [xs]
        caches: dict[int, list] = {}
        for node in range(1, len(self.node_dims)):
            total = np.zeros((batch, self.node_dims[node]))
            for e_idx in self._incoming[node]:
                edge = self.edges[e_idx]
                h = values[edge.src]
                layer_caches = []
                for layer in edge.layers:
                    h, cache = layer.forward(self.params, h, mode, update_running)
                    if not np.all(np.isfinite(h)):
                        raise NumericError(
                            f"Non-finite activation after layer {layer.index} ({layer!r})",
                            layer_index=layer.index,
                        )
                    layer_caches.append(cache)
                caches[e_idx] = layer_caches
                total = total + h
            values.append(total)
        return values[-1], caches

    def backprop(self, caches: dict[int, list], d_logits: np.ndarray) -> np.ndarray:
        """Gradient of ``sum(d_logits * logits)`` with respect to ``params``."""
        grad = np.zeros_like(self.params)
        d_nodes = [np.zeros((d_logits.shape[0], dim)) for dim in self.node_dims]
        d_nodes[-1] = np.asarray(d_logits, dtype=np.float64)
        for node in range(len(self.node_dims) - 1, 0, -1):
            d_node = d_nodes[node]
            for e_idx in self._incoming[node]:
                edge = self.edges[e_idx]
                g = d_node
                for layer, cache in zip(reversed(edge.layers), reversed(caches[e_idx])):
                    g = layer.backward(self.params, cache, g, grad)
                    if not np.all(np.isfinite(g)):
                        raise NumericError(
                            f"Non-finite gradient at layer {layer.index} ({layer!r})",
                            layer_index=layer.index,
                        )
                d_nodes[edge.src] = d_nodes[edge.src] + g
        if not np.all(np.isfinite(grad)):
            raise NumericError("Non-finite parameter gradient")
        return grad

    def __repr__(self) -> str:
        ops = ",".join(edge.op for edge in self.edges)
        return f"Network(nodes={self.node_dims}, edges=[{ops}], P={self.parameter_count})"
