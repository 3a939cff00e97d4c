import logging
from dataclasses import dataclass

import numpy as np

from ntk_lab.errors import ContractError
from ntk_lab.linalg import Rng

logger = logging.getLogger(__name__)

TEST_FRACTION = 0.2


@dataclass(frozen=True, eq=False)
class Dataset:
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    classes: int
    seed: int = 0
    spread: float = 0.0

    def __post_init__(self):
        for name in ("train_x", "test_x"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        for name in ("train_y", "test_y"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        if self.train_x.ndim != 2 or self.test_x.ndim != 2:
            raise ContractError("Dataset inputs must be N x d matrices")
        if self.train_x.shape[0] == 0 or self.test_x.shape[0] == 0:
            raise ContractError("Both dataset splits must be nonempty")
        if self.train_x.shape[1] != self.test_x.shape[1]:
            raise ContractError("Train and test inputs differ in dimension")
        if self.train_y.shape != (self.train_x.shape[0],) or self.test_y.shape != (self.test_x.shape[0],):
            raise ContractError("One label per sample is required")
        for labels in (self.train_y, self.test_y):
            if labels.min() < 0 or labels.max() >= self.classes:
                raise ContractError(f"Labels must lie in [0, {self.classes})")

    @property
    def input_dim(self) -> int:
        return int(self.train_x.shape[1])

    @property
    def train(self) -> tuple[np.ndarray, np.ndarray]:
        return self.train_x, self.train_y

    @property
    def test(self) -> tuple[np.ndarray, np.ndarray]:
        return self.test_x, self.test_y


def make_dataset(classes: int, input_dim: int, per_class: int, spread: float, seed: int) -> Dataset:
    """
    Isotropic Gaussian blobs around unit-norm random centers, split 80/20
    inside every class so each class appears in both splits.
    """
    if classes < 2 or input_dim < 2 or per_class < 4:
        raise ContractError(
            f"make_dataset needs classes >= 2, input_dim >= 2, per_class >= 4; "
            f"got ({classes}, {input_dim}, {per_class})"
        )
    if spread < 0:
        raise ContractError(f"spread must be >= 0, got {spread}")
    rng = Rng.derive(seed, "data")
    centers = rng.child("centers").normal(1.0, (classes, input_dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)

    n_test = max(1, int(round(per_class * TEST_FRACTION)))
    train_x, train_y, test_x, test_y = [], [], [], []
    for cls in range(classes):
        noise = rng.child("noise", cls).normal(1.0, (per_class, input_dim))
        points = centers[cls] + spread * noise
        order = rng.child("split", cls).permutation(per_class)
        test_x.append(points[order[:n_test]])
        train_x.append(points[order[n_test:]])
        test_y.append(np.full(n_test, cls))
        train_y.append(np.full(per_class - n_test, cls))

    train_order = rng.child("train-order").permutation(classes * (per_class - n_test))
    test_order = rng.child("test-order").permutation(classes * n_test)
    ds = Dataset(
        np.concatenate(train_x)[train_order],
        np.concatenate(train_y)[train_order],
        np.concatenate(test_x)[test_order],
        np.concatenate(test_y)[test_order],
        classes=classes,
        seed=seed,
        spread=spread,
    )
    logger.debug(f"Dataset seed={seed}: {ds.train_x.shape[0]} train / {ds.test_x.shape[0]} test samples")
    return ds


def class_centers(ds: Dataset) -> np.ndarray:
    return np.stack([ds.train_x[ds.train_y == c].mean(axis=0) for c in range(ds.classes)])


def save_dataset(path: str, ds: Dataset) -> None:
    """Header ``C d seed n_train n_test spread``, then train rows, then test rows (``class v1 ... vd``)."""
    with open(path, "w") as file:
        file.write(
            f"{ds.classes} {ds.input_dim} {ds.seed} {ds.train_x.shape[0]} {ds.test_x.shape[0]} {ds.spread!r}\n"
        )
        for xs, ys in (ds.train, ds.test):
            for x, y in zip(xs, ys):
                file.write(f"{int(y)} " + " ".join(repr(float(v)) for v in x) + "\n")


def load_dataset(path: str) -> Dataset:
    with open(path, "r") as file:
        lines = [line.split() for line in file if line.strip()]
    try:
        classes, dim, seed, n_train, n_test = (int(v) for v in lines[0][:5])
        spread = float(lines[0][5])
        rows = lines[1:]
        labels = np.array([int(row[0]) for row in rows])
        values = np.array([[float(v) for v in row[1:]] for row in rows])
    except (IndexError, ValueError) as err:
        raise ContractError(f"Malformed dataset file {path}: {err}")
    if values.shape != (n_train + n_test, dim):
        raise ContractError(f"Dataset file {path} does not match its header")
    return Dataset(
        values[:n_train], labels[:n_train], values[n_train:], labels[n_train:], classes, seed, spread
    )
