import numpy as np

from ntk_lab.errors import ContractError
from .layers import Mode
from .network import Network


def _as_batch(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def forward(net: Network, x, mode: Mode = "eval") -> np.ndarray:
    """
    Logits for one sample (1-D input) or a batch (2-D input). Never touches
    the running statistics; training goes through ``loss_and_grad``.
    """
    xs, single = _as_batch(x)
    logits, _ = net.run(xs, mode)
    return logits[0] if single else logits


def scalar_readout(net: Network, x, mode: Mode = "eval"):
    """The scalar the NTK differentiates: mean (or first) of the logits."""
    logits = forward(net, x, mode)
    return logits @ net.readout_weights() if logits.ndim == 2 else float(logits @ net.readout_weights())


def batch_gradients(net: Network, xs, mode: Mode = "eval") -> np.ndarray:
    """
    The N x P gradient set: row i is the gradient of sample i's scalar readout.

    In eval mode samples never interact, so each row equals
    ``per_sample_gradient`` of that sample. In train mode the normalization
    layers standardize with the statistics of the whole batch and row i
    includes the gradient flowing through those statistics.
    """
    xs, _ = _as_batch(xs)
    _, caches = net.run(xs, mode)
    weights = net.readout_weights()
    rows = np.zeros((xs.shape[0], net.parameter_count))
    for i in range(xs.shape[0]):
        d_logits = np.zeros((xs.shape[0], net.output_dim))
        d_logits[i] = weights
        rows[i] = net.backprop(caches, d_logits)
    return rows


def per_sample_gradient(net: Network, x, mode: Mode = "eval") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ContractError(f"per_sample_gradient takes one sample, got shape {x.shape}")
    return batch_gradients(net, x[None, :], mode)[0]


def one_vs_all_targets(labels, class_count: int) -> np.ndarray:
    """+1 at the true class, -1 elsewhere."""
    labels = np.asarray(labels, dtype=np.int64)
    targets = -np.ones((labels.size, class_count))
    targets[np.arange(labels.size), labels] = 1.0
    return targets


def loss_and_grad(
    net: Network,
    xs,
    targets,
    mode: Mode = "train",
    update_running: bool = False,
) -> tuple[float, np.ndarray]:
    """
    Summed squared loss ``sum_i ||y_i - f(x_i)||^2`` and its exact parameter gradient.
    """
    xs, _ = _as_batch(xs)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (xs.shape[0], net.output_dim):
        raise ContractError(
            f"Targets must have shape {(xs.shape[0], net.output_dim)}, got {targets.shape}"
        )
    if not np.all(np.abs(targets) == 1.0):
        raise ContractError("Targets must be +-1 one-vs-all encoded")
    logits, caches = net.run(xs, mode, update_running=update_running)
    residual = logits - targets
    loss = float(np.sum(residual * residual))
    grad = net.backprop(caches, 2.0 * residual)
    return loss, grad
