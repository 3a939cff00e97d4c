import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from ntk_lab.errors import ContractError, DegenerateError
from ntk_lab.linalg import Rng, frobenius_norm, pearson_correlation
from ntk_lab.network import Mode, Network, batch_gradients

logger = logging.getLogger(__name__)

DEFAULT_PROBE_SIZE = 32


@dataclass(frozen=True, eq=False)
class ProbeBatch:
    """The fixed minibatch every architecture of a study is probed with."""

    samples: np.ndarray
    labels: np.ndarray
    strict: bool = True

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if samples.ndim != 2 or labels.shape != (samples.shape[0],):
            raise ContractError(
                f"Probe needs an N x d sample matrix and N labels, got {samples.shape} and {labels.shape}"
            )
        if self.strict and (samples.shape[0] < 2 or np.unique(labels).size < 2):
            raise ContractError("Probe batch needs N >= 2 and at least two distinct classes")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return int(self.samples.shape[0])

    def digest(self) -> str:
        """Short content hash used to key cached metric values."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.samples).tobytes())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        return h.hexdigest()[:12]

    def permuted(self, order) -> "ProbeBatch":
        order = np.asarray(order)
        return ProbeBatch(self.samples[order], self.labels[order], self.strict)


def draw_probe(xs, labels, size: int, rng: Rng) -> ProbeBatch:
    """
    Class-stratified draw: shuffle each class, then take samples round-robin
    over classes until ``size`` are collected.
    """
    xs = np.asarray(xs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if not 1 <= size <= labels.size:
        raise ContractError(f"Probe size {size} outside [1, {labels.size}]")
    pools = []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        pools.append(list(members[rng.child("class", int(cls)).permutation(members.size)]))
    picked: list[int] = []
    while len(picked) < size:
        for pool in pools:
            if pool and len(picked) < size:
                picked.append(int(pool.pop(0)))
    picked_arr = np.asarray(picked)
    return ProbeBatch(xs[picked_arr], labels[picked_arr], strict=size >= 2)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    values: np.ndarray
    degenerate: bool = False

    @property
    def size(self) -> int:
        return int(self.values.shape[0])


def compute_ntk(net: Network, probe: ProbeBatch, mode: Mode = "eval") -> KernelMatrix:
    """
    Empirical NTK: the Gram matrix G G^T of per-sample readout gradients,
    symmetrized to scrub rounding asymmetry. An all-zero gradient set (for
    example a cell of zeroize edges only) yields a zero kernel flagged
    degenerate.
    """
    grads = batch_gradients(net, probe.samples, mode)
    theta = grads @ grads.T
    theta = (theta + theta.T) / 2.0
    degenerate = not np.any(grads)
    if degenerate:
        logger.debug(f"Degenerate kernel for {net!r}")
    return KernelMatrix(theta, degenerate)


def _values(kernel) -> np.ndarray:
    return kernel.values if isinstance(kernel, KernelMatrix) else np.asarray(kernel, dtype=np.float64)


def kernel_correlation(theta0, thetat) -> float:
    return pearson_correlation(_values(theta0), _values(thetat))


def relative_kernel_difference(theta0, thetat) -> float:
    """||theta_t - theta_0||_F / ||theta_0||_F."""
    a = _values(theta0)
    b = _values(thetat)
    if a.shape != b.shape:
        raise ContractError(f"Kernel shapes differ: {a.shape} vs {b.shape}")
    base = frobenius_norm(a)
    if base == 0.0:
        raise DegenerateError("Relative kernel difference from a zero kernel is undefined")
    return frobenius_norm(b - a) / base


def write_kernel(path: str, kernel) -> None:
    """Plain-text form: first line N, then N rows of N decimals."""
    values = _values(kernel)
    with open(path, "w") as file:
        file.write(f"{values.shape[0]}\n")
        for row in values:
            file.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_kernel(path: str) -> np.ndarray:
    with open(path, "r") as file:
        lines = [line.split() for line in file if line.strip()]
    try:
        n = int(lines[0][0])
        values = np.array([[float(v) for v in row] for row in lines[1:]])
    except (IndexError, ValueError) as err:
        raise ContractError(f"Malformed kernel file {path}: {err}")
    if values.shape != (n, n):
        raise ContractError(f"Kernel file {path} declares N={n} but holds {values.shape}")
    return values
