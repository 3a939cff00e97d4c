from collections import Counter

import numpy as np
import pytest
from scipy import stats

from ntk_lab.errors import ContractError, MutationError, SpaceSizeError
from ntk_lab.linalg import Rng
from ntk_lab.network import Linear, forward
from ntk_lab.network.layers import NORM_EPS
from ntk_lab.space import (
    SpaceConfig,
    build_network,
    cell_edges,
    encoding_at,
    encoding_index,
    enumerate_space,
    format_encoding,
    instantiate,
    mutate,
    parse_encoding,
    sample_random,
)


def test_enumerate_small_spaces():
    assert list(enumerate_space(SpaceConfig(nodes=2, ops=3))) == [(0,), (1,), (2,)]
    encodings = list(enumerate_space(SpaceConfig(nodes=3, ops=3)))
    assert len(encodings) == 27
    assert encodings[0] == (0, 0, 0)
    assert encodings[-1] == (2, 2, 2)
    assert encodings == sorted(encodings)


def test_reference_space_size():
    cfg = SpaceConfig()
    assert cfg.edge_count == 6
    assert cfg.size == 15625
    assert sum(1 for _ in enumerate_space(cfg)) == 15625


def test_enumeration_cap():
    with pytest.raises(SpaceSizeError):
        enumerate_space(SpaceConfig(nodes=5, ops=5))


def test_index_round_trip():
    cfg = SpaceConfig(nodes=3, ops=3)
    for i, enc in enumerate(enumerate_space(cfg)):
        assert encoding_index(enc, cfg) == i
        assert encoding_at(i, cfg) == enc
    with pytest.raises(ContractError):
        encoding_at(27, cfg)


def test_cell_edges_grouped_by_destination():
    assert cell_edges(4) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]


def test_encoding_strings():
    cfg = SpaceConfig(nodes=3, ops=5)
    assert format_encoding((1, 2, 0)) == "1|2|0"
    assert parse_encoding("1|2|0", cfg) == (1, 2, 0)
    with pytest.raises(ContractError):
        parse_encoding("1|x|0")
    with pytest.raises(ContractError):
        parse_encoding("1|2", cfg)
    with pytest.raises(ContractError):
        parse_encoding("1|2|5", cfg)


def test_zeroize_cell_leaves_only_the_head_bias():
    cfg = SpaceConfig(nodes=3, ops=3, feature_dim=4, input_dim=5)
    net = instantiate((0, 0, 0), cfg, "kaiming", Rng(0))
    net.set_linear(len(net.layers) - 1, net.layers[-1].weight(net.params), [0.5, -1.0, 2.0])
    xs = Rng(1).normal(size=(6, 5))
    np.testing.assert_array_equal(forward(net, xs), np.tile([0.5, -1.0, 2.0], (6, 1)))


def test_skip_cell_doubles_the_stem():
    cfg = SpaceConfig(nodes=3, ops=3, feature_dim=4, input_dim=5)
    net = instantiate((1, 1, 1), cfg, "xavier", Rng(0))
    stem, head = net.layers[0], net.layers[-1]
    x = Rng(2).normal(size=5)
    # fresh stem norm statistics are 0 and 1
    s = (stem.weight(net.params) @ x + stem.bias_vector(net.params)) / np.sqrt(1.0 + NORM_EPS)
    expected = head.weight(net.params) @ (2 * s) + head.bias_vector(net.params)
    np.testing.assert_allclose(forward(net, x), expected, atol=1e-12)


def test_mixed_cell_matches_manual_assembly():
    cfg = SpaceConfig(nodes=3, ops=3, feature_dim=4, input_dim=5)
    net = instantiate((1, 2, 0), cfg, "kaiming", Rng(3))
    linears = [layer for layer in net.layers if isinstance(layer, Linear)]
    stem, lin1, head = linears
    w = lambda layer: layer.weight(net.params)
    b = lambda layer: layer.bias_vector(net.params)

    x = Rng(4).normal(size=5)
    # fresh norm statistics are 0 and 1; lin1 on edge (0, 2), zero on edge (1, 2)
    node0 = (w(stem) @ x + b(stem)) / np.sqrt(1.0 + NORM_EPS)
    node2 = (w(lin1) @ node0 + b(lin1)) / np.sqrt(1.0 + NORM_EPS)
    expected = w(head) @ node2 + b(head)
    np.testing.assert_allclose(forward(net, x), expected, atol=1e-12)


def test_stem_and_trainable_ops_are_normalized():
    cfg = SpaceConfig(nodes=3, ops=3, feature_dim=4, input_dim=5)
    assert len(instantiate((1, 1, 1), cfg, "kaiming", Rng(0)).norm_layers) == 1
    assert len(instantiate((2, 2, 0), cfg, "kaiming", Rng(0)).norm_layers) == 3
    assert len(instantiate((0, 0, 0), cfg, "kaiming", Rng(0)).norm_layers) == 1


def test_instantiate_is_deterministic():
    cfg = SpaceConfig(nodes=3, ops=5)
    first = instantiate((3, 2, 4), cfg, "kaiming", Rng(9, "init"))
    second = instantiate((3, 2, 4), cfg, "kaiming", Rng(9, "init"))
    np.testing.assert_array_equal(first.params, second.params)


def test_every_architecture_is_finite_on_unit_inputs():
    cfg = SpaceConfig(nodes=3, ops=5)
    xs = Rng(0).normal(size=(8, cfg.input_dim))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    for enc in enumerate_space(cfg):
        net = instantiate(enc, cfg, "kaiming", Rng(1))
        assert np.all(np.isfinite(forward(net, xs)))


def test_invalid_op_code():
    with pytest.raises(ContractError):
        build_network((0, 1, 3), SpaceConfig(nodes=3, ops=3))


def test_sample_random():
    cfg = SpaceConfig(nodes=3, ops=1)
    assert sample_random(cfg, Rng(0)) == (0, 0, 0)

    cfg = SpaceConfig(nodes=3, ops=3)
    assert sample_random(cfg, Rng(5)) == sample_random(cfg, Rng(5))

    rng = Rng(6)
    counts = Counter(sample_random(cfg, rng) for _ in range(10000))
    assert len(counts) == 27
    assert stats.chisquare(list(counts.values())).pvalue > 1e-3


def test_mutate_changes_exactly_one_edge():
    cfg = SpaceConfig(nodes=4, ops=5)
    rng = Rng(0)
    enc = (0, 1, 2, 3, 4, 0)
    for _ in range(500):
        child = mutate(enc, cfg, rng)
        assert sum(a != b for a, b in zip(enc, child)) == 1
        enc = child


def test_mutate_binary_op_set():
    cfg = SpaceConfig(nodes=2, ops=2)
    rng = Rng(1)
    assert all(mutate((0,), cfg, rng) == (1,) for _ in range(20))


def test_mutate_distribution():
    cfg = SpaceConfig(nodes=3, ops=3)
    rng = Rng(2)
    counts = Counter(mutate((0, 0, 0), cfg, rng) for _ in range(12000))
    assert set(counts) == {(1, 0, 0), (2, 0, 0), (0, 1, 0), (0, 2, 0), (0, 0, 1), (0, 0, 2)}
    assert stats.chisquare(list(counts.values())).pvalue > 1e-3


def test_mutate_single_op():
    with pytest.raises(MutationError):
        mutate((0, 0, 0), SpaceConfig(nodes=3, ops=1), Rng(0))


def test_space_config_validation():
    with pytest.raises(ContractError):
        SpaceConfig(nodes=1)
    with pytest.raises(ContractError):
        SpaceConfig(ops=6)
    with pytest.raises(ContractError):
        SpaceConfig(classes=1)
