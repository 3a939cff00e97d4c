from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

Mode = Literal["train", "eval"]
MODES = ("train", "eval")
NORM_EPS = 1e-5


class Layer(ABC):
    """
    One step of an edge chain. Trainable layers own ``size`` elements of the
    network's flat parameter vector starting at ``offset``; the network
    assigns both when it is assembled.
    """

    kind = "layer"

    def __init__(self, in_dim: int, out_dim: int):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.offset = 0
        self.index = -1

    @property
    def size(self) -> int:
        return 0

    @abstractmethod
    def forward(
        self, params: np.ndarray, x: np.ndarray, mode: Mode, update_running: bool
    ) -> tuple[np.ndarray, Any]:
        pass

    @abstractmethod
    def backward(
        self, params: np.ndarray, cache: Any, dy: np.ndarray, grad: np.ndarray
    ) -> np.ndarray:
        """Accumulates parameter gradients into ``grad`` and returns dL/dx."""
        pass

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.in_dim}->{self.out_dim})"


class Linear(Layer):
    kind = "linear"

    def __init__(self, in_dim: int, out_dim: int, bias: bool = True):
        super().__init__(in_dim, out_dim)
        self.bias = bias

    @property
    def size(self) -> int:
        return self.in_dim * self.out_dim + (self.out_dim if self.bias else 0)

    def weight(self, params: np.ndarray) -> np.ndarray:
        n = self.in_dim * self.out_dim
        return params[self.offset : self.offset + n].reshape(self.out_dim, self.in_dim)

    def bias_vector(self, params: np.ndarray) -> np.ndarray | None:
        if not self.bias:
            return None
        start = self.offset + self.in_dim * self.out_dim
        return params[start : start + self.out_dim]

    def forward(self, params, x, mode, update_running):
        y = x @ self.weight(params).T
        b = self.bias_vector(params)
        if b is not None:
            y = y + b
        return y, x

    def backward(self, params, cache, dy, grad):
        x = cache
        n = self.in_dim * self.out_dim
        grad[self.offset : self.offset + n] += (dy.T @ x).ravel()
        if self.bias:
            grad[self.offset + n : self.offset + n + self.out_dim] += dy.sum(axis=0)
        return dy @ self.weight(params)


class ReLU(Layer):
    kind = "relu"

    def __init__(self, dim: int):
        super().__init__(dim, dim)

    def forward(self, params, x, mode, update_running):
        mask = x > 0
        return np.where(mask, x, 0.0), mask

    def backward(self, params, cache, dy, grad):
        return np.where(cache, dy, 0.0)


class Identity(Layer):
    kind = "skip"

    def __init__(self, dim: int):
        super().__init__(dim, dim)

    def forward(self, params, x, mode, update_running):
        return x, None

    def backward(self, params, cache, dy, grad):
        return dy


class Zero(Layer):
    kind = "zero"

    def __init__(self, dim: int):
        super().__init__(dim, dim)

    def forward(self, params, x, mode, update_running):
        return np.zeros((x.shape[0], self.out_dim)), None

    def backward(self, params, cache, dy, grad):
        return np.zeros((dy.shape[0], self.in_dim))


class FixedAverage(Layer):
    """Non-trainable 3-wide moving average over features; edge windows average in-range entries only."""

    kind = "avg"

    def __init__(self, dim: int):
        super().__init__(dim, dim)
        projection = np.zeros((dim, dim))
        for k in range(dim):
            lo, hi = max(0, k - 1), min(dim, k + 2)
            projection[k, lo:hi] = 1.0 / (hi - lo)
        self.projection = projection

    def forward(self, params, x, mode, update_running):
        return x @ self.projection.T, None

    def backward(self, params, cache, dy, grad):
        return dy @ self.projection


@dataclass
class NormState:
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.9

    @classmethod
    def fresh(cls, dim: int, momentum: float = 0.9) -> "NormState":
        return cls(np.zeros(dim), np.ones(dim), momentum)


class Norm(Layer):
    """
    Per-feature standardization with learned scale and shift.

    train mode standardizes with the batch statistics (and, when asked,
    folds them into the running statistics); eval mode uses the running
    statistics and never touches them.
    """

    kind = "norm"

    def __init__(self, dim: int, momentum: float = 0.9):
        super().__init__(dim, dim)
        self.state = NormState.fresh(dim, momentum)

    @property
    def size(self) -> int:
        return 2 * self.in_dim

    def gamma(self, params: np.ndarray) -> np.ndarray:
        return params[self.offset : self.offset + self.in_dim]

    def beta(self, params: np.ndarray) -> np.ndarray:
        return params[self.offset + self.in_dim : self.offset + 2 * self.in_dim]

    def forward(self, params, x, mode, update_running):
        if mode == "train":
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            if update_running:
                m = self.state.momentum
                self.state.running_mean = m * self.state.running_mean + (1.0 - m) * mean
                self.state.running_var = m * self.state.running_var + (1.0 - m) * var
        else:
            mean = self.state.running_mean
            var = self.state.running_var
        inv_std = 1.0 / np.sqrt(var + NORM_EPS)
        x_hat = (x - mean) * inv_std
        y = self.gamma(params) * x_hat + self.beta(params)
        return y, (x_hat, inv_std, mode)

    def backward(self, params, cache, dy, grad):
        x_hat, inv_std, mode = cache
        d = self.in_dim
        grad[self.offset : self.offset + d] += (dy * x_hat).sum(axis=0)
        grad[self.offset + d : self.offset + 2 * d] += dy.sum(axis=0)
        dx_hat = dy * self.gamma(params)
        if mode != "train":
            return dx_hat * inv_std
        batch = dy.shape[0]
        return (inv_std / batch) * (
            batch * dx_hat
            - dx_hat.sum(axis=0)
            - x_hat * (dx_hat * x_hat).sum(axis=0)
        )


@dataclass
class Edge:
    """A chain of layers carrying node ``src`` into node ``dst``."""

    src: int
    dst: int
    layers: list[Layer] = field(default_factory=list)
    op: str = "chain"
