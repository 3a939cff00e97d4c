import logging

from ntk_lab.errors import ContractError
from ntk_lab.linalg import Rng
from ntk_lab.network import Edge, FixedAverage, Identity, Layer, Linear, Network, Norm, ReLU, Zero
from ntk_lab.network.network import Readout
from .space import OPS, CellEncoding, SpaceConfig, cell_edges, validate_encoding

logger = logging.getLogger(__name__)


def op_layers(op: str, dim: int, norm_momentum: float) -> list[Layer]:
    if op == "zero":
        return [Zero(dim)]
    if op == "skip":
        return [Identity(dim)]
    if op == "lin1":
        return [Linear(dim, dim), Norm(dim, norm_momentum)]
    if op == "lin3":
        return [Linear(dim, dim), ReLU(dim), Linear(dim, dim), Norm(dim, norm_momentum)]
    if op == "avg":
        return [FixedAverage(dim)]
    raise ContractError(f"Unknown op: {op!r}")


def build_network(enc: CellEncoding, cfg: SpaceConfig, readout: Readout = "mean") -> Network:
    """
    Assembles the (uninitialized) network for an encoding: stem linear layer
    and normalization, ``cells_stacked`` copies of the cell, linear
    classifier head.

    The stem normalization puts the cell input at unit scale, so a plain
    skip path and a normalized lin1 path feed the head features of the same
    size.
    """
    enc = validate_encoding(enc, cfg)
    h = cfg.feature_dim
    node_dims = [cfg.input_dim, h]
    edges = [Edge(0, 1, [Linear(cfg.input_dim, h), Norm(h, cfg.norm_momentum)], "stem")]
    cell_input = 1
    for _ in range(cfg.cells_stacked):
        base = cell_input
        node_dims.extend([h] * (cfg.nodes - 1))
        for (i, j), code in zip(cell_edges(cfg.nodes), enc):
            op = OPS[code]
            edges.append(Edge(base + i, base + j, op_layers(op, h, cfg.norm_momentum), op))
        cell_input = base + cfg.nodes - 1
    node_dims.append(cfg.classes)
    edges.append(Edge(cell_input, cell_input + 1, [Linear(h, cfg.classes)], "head"))
    return Network(node_dims, edges, readout)


def instantiate(
    enc: CellEncoding,
    cfg: SpaceConfig,
    scheme: str,
    rng: Rng,
    readout: Readout = "mean",
    gaussian_std: float = 0.05,
) -> Network:
    net = build_network(enc, cfg, readout)
    net.initialize(scheme, rng, gaussian_std)
    logger.debug(f"Instantiated {net!r}")
    return net
