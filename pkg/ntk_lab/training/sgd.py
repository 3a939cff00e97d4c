import logging
from dataclasses import dataclass, field

import numpy as np

from ntk_lab.errors import ConfigurationError, ContractError, NumericError, TrainingDiverged
from ntk_lab.linalg import Rng
from ntk_lab.network import Network, forward, loss_and_grad, one_vs_all_targets
from .dataset import Dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.025
    momentum: float = 0.9
    weight_decay: float = 3e-4
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0

    def __post_init__(self):
        # lr = 0 is accepted: it freezes the parameters, which is a useful control.
        if self.learning_rate < 0:
            raise ConfigurationError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ConfigurationError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ConfigurationError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.batch_size < 1 or self.epochs < 0:
            raise ConfigurationError("batch_size must be >= 1 and epochs >= 0")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    test_accuracy: list[float] = field(default_factory=list)
    snapshots: dict[int, Network] = field(default_factory=dict)

    @property
    def final_test_accuracy(self) -> float:
        return self.test_accuracy[-1] if self.test_accuracy else float("nan")

    @property
    def epochs_trained(self) -> int:
        return len(self.train_loss)


class SGD:
    """Momentum SGD with coupled weight decay: v <- mu*v + (g + wd*w); w <- w - lr*v."""

    def __init__(self, params: np.ndarray, lr: float, momentum: float, weight_decay: float):
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity = np.zeros_like(params)

    def step(self, grad: np.ndarray) -> None:
        d_p = grad + self.weight_decay * self.params
        self.velocity = self.momentum * self.velocity + d_p
        self.params -= self.lr * self.velocity


def evaluate_accuracy(net: Network, split: tuple[np.ndarray, np.ndarray]) -> float:
    """Fraction of samples whose argmax logit is the label; ties go to the lowest class."""
    xs, ys = split
    ys = np.asarray(ys)
    if ys.size == 0:
        raise ContractError("Cannot evaluate accuracy on an empty split")
    logits = forward(net, xs, "eval")
    return float(np.mean(np.argmax(logits, axis=1) == ys))


def train(
    net: Network,
    ds: Dataset,
    cfg: TrainConfig,
    snapshot_epochs: set[int] | frozenset[int] = frozenset(),
) -> TrainHistory:
    """
    Mini-batch SGD on the +-1 squared loss, averaged over each batch.

    Epoch e shuffles with the stream ``(cfg.seed, "train", e)``, so training
    for t epochs reproduces the epoch-t snapshot of any longer run. Each
    requested snapshot epoch (0 meaning before training) stores a clone of
    the network, normalization statistics included.
    """
    if net.input_dim != ds.input_dim or net.output_dim != ds.classes:
        raise ContractError(
            f"Network maps {net.input_dim} -> {net.output_dim}, dataset is {ds.input_dim} -> {ds.classes}"
        )
    xs, ys = ds.train
    targets = one_vs_all_targets(ys, ds.classes)
    optimizer = SGD(net.params, cfg.learning_rate, cfg.momentum, cfg.weight_decay)
    history = TrainHistory()
    if 0 in snapshot_epochs:
        history.snapshots[0] = net.clone()

    n = xs.shape[0]
    for epoch in range(1, cfg.epochs + 1):
        order = Rng.derive(cfg.seed, "train", epoch).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            try:
                loss, grad = loss_and_grad(net, xs[batch], targets[batch], "train", update_running=True)
            except NumericError as err:
                logger.error(f"Non-finite values during epoch {epoch}: {err}")
                raise TrainingDiverged(epoch, float("nan")) from err
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch, loss)
            optimizer.step(grad / batch.size)
            epoch_loss += loss
        if not np.all(np.isfinite(net.params)):
            raise TrainingDiverged(epoch, float("nan"))

        history.train_loss.append(epoch_loss / n)
        history.train_accuracy.append(evaluate_accuracy(net, ds.train))
        history.test_accuracy.append(evaluate_accuracy(net, ds.test))
        if epoch in snapshot_epochs:
            history.snapshots[epoch] = net.clone()
        logger.debug(
            f"epoch {epoch}: loss={history.train_loss[-1]:.4f} test_acc={history.test_accuracy[-1]:.3f}"
        )
    return history
