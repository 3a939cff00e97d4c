import itertools
import logging
from dataclasses import dataclass
from typing import Iterator

from ntk_lab.errors import ContractError, MutationError, SpaceSizeError
from ntk_lab.linalg import Rng

logger = logging.getLogger(__name__)

# Dense stand-ins for zeroize, skip connection, 1x1 conv, 3x3 conv and 3x3 average pooling.
OPS = ("zero", "skip", "lin1", "lin3", "avg")
DEFAULT_SPACE_CAP = 20000

CellEncoding = tuple[int, ...]


@dataclass(frozen=True)
class SpaceConfig:
    nodes: int = 4
    ops: int = 5
    feature_dim: int = 16
    cells_stacked: int = 1
    classes: int = 3
    input_dim: int = 16
    norm_momentum: float = 0.9
    cap: int = DEFAULT_SPACE_CAP

    def __post_init__(self):
        if self.nodes < 2:
            raise ContractError(f"A cell needs at least 2 nodes, got {self.nodes}")
        if not 1 <= self.ops <= len(OPS):
            raise ContractError(f"ops must be in [1, {len(OPS)}], got {self.ops}")
        if self.feature_dim < 1 or self.cells_stacked < 1 or self.input_dim < 1:
            raise ContractError("feature_dim, cells_stacked and input_dim must be >= 1")
        if self.classes < 2:
            raise ContractError(f"classes must be >= 2, got {self.classes}")

    @property
    def edge_count(self) -> int:
        return self.nodes * (self.nodes - 1) // 2

    @property
    def size(self) -> int:
        return self.ops**self.edge_count

    @property
    def op_names(self) -> tuple[str, ...]:
        return OPS[: self.ops]


def cell_edges(nodes: int) -> list[tuple[int, int]]:
    """Edges grouped by destination node, sources ascending: (0,1), (0,2), (1,2), (0,3), ..."""
    return [(i, j) for j in range(1, nodes) for i in range(j)]


def validate_encoding(enc, cfg: SpaceConfig) -> CellEncoding:
    enc = tuple(int(code) for code in enc)
    if len(enc) != cfg.edge_count:
        raise ContractError(f"Encoding {enc} has {len(enc)} edges, space needs {cfg.edge_count}")
    for code in enc:
        if not 0 <= code < cfg.ops:
            raise ContractError(f"Op code {code} outside [0, {cfg.ops})")
    return enc


def format_encoding(enc: CellEncoding) -> str:
    return "|".join(str(code) for code in enc)


def parse_encoding(text: str, cfg: SpaceConfig | None = None) -> CellEncoding:
    """Parses the pipe-separated form ``"1|2|0"``."""
    try:
        enc = tuple(int(part) for part in text.strip().split("|"))
    except ValueError:
        raise ContractError(f"Malformed encoding string: {text!r}")
    if cfg is not None:
        return validate_encoding(enc, cfg)
    return enc


def enumerate_space(cfg: SpaceConfig) -> Iterator[CellEncoding]:
    """All encodings exactly once, in lexicographic order."""
    if cfg.size > cfg.cap:
        raise SpaceSizeError(
            f"Space has {cfg.size} architectures, above the cap of {cfg.cap}; "
            f"shrink nodes (V={cfg.nodes}) or ops (K={cfg.ops})"
        )
    return itertools.product(range(cfg.ops), repeat=cfg.edge_count)


def encoding_index(enc: CellEncoding, cfg: SpaceConfig) -> int:
    index = 0
    for code in validate_encoding(enc, cfg):
        index = index * cfg.ops + code
    return index


def encoding_at(index: int, cfg: SpaceConfig) -> CellEncoding:
    if not 0 <= index < cfg.size:
        raise ContractError(f"Index {index} outside [0, {cfg.size})")
    codes = []
    for _ in range(cfg.edge_count):
        index, code = divmod(index, cfg.ops)
        codes.append(code)
    return tuple(reversed(codes))


def sample_random(cfg: SpaceConfig, rng: Rng) -> CellEncoding:
    return tuple(int(code) for code in rng.integers(cfg.ops, size=cfg.edge_count))


def mutate(enc: CellEncoding, cfg: SpaceConfig, rng: Rng) -> CellEncoding:
    """Reassigns one uniformly chosen edge to a uniformly chosen different op."""
    enc = validate_encoding(enc, cfg)
    if cfg.ops < 2:
        raise MutationError("Cannot mutate: the space has a single op")
    edge = int(rng.integers(cfg.edge_count))
    shift = 1 + int(rng.integers(cfg.ops - 1))
    child = list(enc)
    child[edge] = (child[edge] + shift) % cfg.ops
    return tuple(child)
