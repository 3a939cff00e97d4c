from .space import (
    OPS,
    CellEncoding,
    SpaceConfig,
    cell_edges,
    encoding_at,
    encoding_index,
    enumerate_space,
    format_encoding,
    mutate,
    parse_encoding,
    sample_random,
    validate_encoding,
)
from .builder import build_network, instantiate, op_layers
