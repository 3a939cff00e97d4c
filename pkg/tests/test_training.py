import numpy as np
import pytest

from ntk_lab.errors import ConfigurationError, ContractError, TrainingDiverged
from ntk_lab.kernel import ProbeBatch, compute_ntk
from ntk_lab.linalg import Rng
from ntk_lab.network import Network, forward, loss_and_grad
from ntk_lab.space import SpaceConfig, instantiate
from ntk_lab.training import (
    SGD,
    Dataset,
    TrainConfig,
    class_centers,
    evaluate_accuracy,
    load_dataset,
    make_dataset,
    save_dataset,
    train,
)

SPACE = SpaceConfig(nodes=3, ops=3, feature_dim=8, input_dim=16, classes=3)


def skip_net(seed: int = 0) -> Network:
    return instantiate((1, 1, 1), SPACE, "kaiming", Rng(seed, "init"))


def test_make_dataset_is_deterministic():
    a = make_dataset(3, 8, 20, 0.3, seed=5)
    b = make_dataset(3, 8, 20, 0.3, seed=5)
    np.testing.assert_array_equal(a.train_x, b.train_x)
    np.testing.assert_array_equal(a.test_y, b.test_y)
    c = make_dataset(3, 8, 20, 0.3, seed=6)
    assert not np.array_equal(a.train_x, c.train_x)


def test_make_dataset_splits():
    ds = make_dataset(3, 8, 20, 0.3, seed=0)
    assert ds.train_x.shape == (48, 8)
    assert ds.test_x.shape == (12, 8)
    for cls in range(3):
        assert np.sum(ds.train_y == cls) == 16
        assert np.sum(ds.test_y == cls) == 4
    train_rows = {tuple(row) for row in ds.train_x}
    assert not any(tuple(row) in train_rows for row in ds.test_x)


def test_zero_spread_is_perfectly_separable():
    ds = make_dataset(3, 8, 10, 0.0, seed=1)
    centers = class_centers(ds)
    distances = np.linalg.norm(ds.test_x[:, None, :] - centers[None, :, :], axis=2)
    assert np.mean(np.argmin(distances, axis=1) == ds.test_y) == 1.0


def test_class_means_near_centers():
    seed, spread, per_class = 2, 0.3, 60
    ds = make_dataset(3, 8, per_class, spread, seed)
    centers = Rng.derive(seed, "data").child("centers").normal(1.0, (3, 8))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    xs = np.concatenate([ds.train_x, ds.test_x])
    ys = np.concatenate([ds.train_y, ds.test_y])
    for cls in range(3):
        mean = xs[ys == cls].mean(axis=0)
        assert np.all(np.abs(mean - centers[cls]) <= 4 * spread / np.sqrt(per_class))


def test_make_dataset_contract():
    with pytest.raises(ContractError):
        make_dataset(1, 8, 20, 0.3, 0)
    with pytest.raises(ContractError):
        make_dataset(3, 8, 3, 0.3, 0)
    with pytest.raises(ContractError):
        Dataset(np.ones((2, 2)), [0, 5], np.ones((1, 2)), [0], classes=2)


def test_dataset_text_format(tmp_path):
    ds = make_dataset(3, 4, 5, 0.3, seed=3)
    path = str(tmp_path / "data.txt")
    save_dataset(path, ds)
    header = open(path).readline().split()
    assert header[:3] == ["3", "4", "3"]
    loaded = load_dataset(path)
    np.testing.assert_array_equal(loaded.train_x, ds.train_x)
    np.testing.assert_array_equal(loaded.test_y, ds.test_y)
    assert loaded.spread == ds.spread


def test_zero_learning_rate_freezes_parameters():
    ds = make_dataset(3, 16, 20, 0.3, seed=0)
    net = skip_net()
    before = net.flatten()
    history = train(net, ds, TrainConfig(learning_rate=0.0, epochs=3))
    np.testing.assert_array_equal(net.params, before)
    assert len(set(history.test_accuracy)) == 1
    assert history.epochs_trained == 3


def test_single_sgd_step_by_hand():
    w, x, y, lr, wd = 0.3, 2.0, 1.0, 0.025, 3e-4
    net = Network.sequential([1, 1], bias=False)
    net.set_linear(0, [[w]])
    _, grad = loss_and_grad(net, np.array([[x]]), np.array([[y]]))
    SGD(net.params, lr=lr, momentum=0.9, weight_decay=wd).step(grad)
    assert net.params[0] == pytest.approx(w - lr * (2 * (w * x - y) * x + wd * w), abs=1e-15)


def test_weight_decay_alone_shrinks_parameters():
    params = Rng(0).normal(size=10)
    optimizer = SGD(params, lr=0.1, momentum=0.9, weight_decay=3e-4)
    norms = [np.linalg.norm(params)]
    for _ in range(20):
        optimizer.step(np.zeros_like(params))
        norms.append(np.linalg.norm(params))
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_skip_architecture_learns_separable_blobs():
    ds = make_dataset(3, 16, 60, 0.2, seed=0)
    history = train(skip_net(0), ds, TrainConfig(epochs=30, seed=0))
    assert history.train_accuracy[-1] >= 0.95
    assert all(0.0 <= acc <= 1.0 for acc in history.test_accuracy)
    assert len(history.train_loss) == 30


def test_training_is_deterministic():
    ds = make_dataset(3, 16, 20, 0.3, seed=1)
    first, second = skip_net(4), skip_net(4)
    h1 = train(first, ds, TrainConfig(epochs=4, seed=9))
    h2 = train(second, ds, TrainConfig(epochs=4, seed=9))
    np.testing.assert_array_equal(first.params, second.params)
    assert h1.train_loss == h2.train_loss
    assert h1.test_accuracy == h2.test_accuracy


def test_snapshots_match_shorter_runs():
    ds = make_dataset(3, 16, 20, 0.3, seed=1)
    probe = ProbeBatch(ds.train_x[:6], ds.train_y[:6], strict=False)
    cfg = TrainConfig(epochs=3, seed=2)
    enc = (2, 0, 1)

    long_net = instantiate(enc, SPACE, "kaiming", Rng(2, "init"))
    history = train(long_net, ds, cfg, snapshot_epochs={0, 2})
    assert sorted(history.snapshots) == [0, 2]

    short_net = instantiate(enc, SPACE, "kaiming", Rng(2, "init"))
    train(short_net, ds, TrainConfig(epochs=2, seed=2))
    np.testing.assert_array_equal(history.snapshots[2].params, short_net.params)
    np.testing.assert_array_equal(
        compute_ntk(history.snapshots[2], probe).values, compute_ntk(short_net, probe).values
    )
    fresh = instantiate(enc, SPACE, "kaiming", Rng(2, "init"))
    np.testing.assert_array_equal(forward(history.snapshots[0], ds.test_x), forward(fresh, ds.test_x))


def test_divergence_reports_epoch():
    ds = make_dataset(3, 16, 20, 0.3, seed=0)
    with np.errstate(all="ignore"):
        with pytest.raises(TrainingDiverged) as err:
            train(skip_net(), ds, TrainConfig(learning_rate=1e3, epochs=30))
    assert err.value.epoch >= 1


def test_train_dimension_contract():
    ds = make_dataset(3, 8, 20, 0.3, seed=0)
    with pytest.raises(ContractError):
        train(skip_net(), ds, TrainConfig(epochs=1))


def test_train_config_validation():
    with pytest.raises(ConfigurationError):
        TrainConfig(learning_rate=-0.1)
    with pytest.raises(ConfigurationError):
        TrainConfig(momentum=1.0)
    with pytest.raises(ConfigurationError):
        TrainConfig(weight_decay=-1.0)


def test_evaluate_accuracy():
    zero = Network.sequential([2, 2])
    split = (np.ones((4, 2)), np.array([0, 1, 0, 1]))
    assert evaluate_accuracy(zero, split) == 0.5

    ds = make_dataset(3, 16, 10, 0.3, seed=4)
    net = skip_net(3)
    correct = 0
    for x, y in zip(ds.test_x, ds.test_y):
        logits = forward(net, x)
        best = 0
        for c in range(1, len(logits)):
            if logits[c] > logits[best]:
                best = c
        correct += int(best == y)
    assert evaluate_accuracy(net, ds.test) == correct / len(ds.test_y)

    with pytest.raises(ContractError):
        evaluate_accuracy(zero, (np.ones((0, 2)), np.array([], dtype=int)))
