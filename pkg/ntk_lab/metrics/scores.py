"""
Kernel-based architecture scores.

F-Norm, Mean and NCN look at the kernel alone. F-Norm upper-bounds the
smallest eigenvalue that controls how fast the squared loss can fall; Mean
is the average gradient correlation; NCN is the negated condition number,
so that all three rank "higher is better".

LGA brings in the labels. A target function generalizes well when it lines
up with the leading eigenvectors of the kernel, which is what the raw
alignment y^T K y rewards. Normalized, it is the correlation between the
centered kernel and the centered +-1 same-class matrix, so it ignores the
kernel's scale and offset.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ntk_lab.errors import ContractError
from ntk_lab.linalg import frobenius_norm, jacobi_eigen, matrix_mean
from .registry import MetricValue, get_metric, metric

logger = logging.getLogger(__name__)

NCN_FLOOR = 1e-12
LGA_FLOOR = 1e-14


def _kernel_values(theta) -> tuple[np.ndarray, bool]:
    values = getattr(theta, "values", theta)
    values = np.asarray(values, dtype=np.float64)
    flagged = bool(getattr(theta, "degenerate", False))
    return values, flagged or not np.any(values)


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    values: np.ndarray
    degenerate: bool = False


def label_matrix(labels) -> LabelMatrix:
    """+1 where two probe samples share a class, -1 otherwise."""
    labels = np.asarray(labels).ravel()
    if labels.size < 2:
        raise ContractError(f"label_matrix needs at least two labels, got {labels.size}")
    same = labels[:, None] == labels[None, :]
    return LabelMatrix(np.where(same, 1.0, -1.0), bool(np.all(same)))


@metric("fnorm")
def f_norm_metric(theta) -> MetricValue:
    values, degenerate = _kernel_values(theta)
    return MetricValue("fnorm", frobenius_norm(values), degenerate=degenerate)


@metric("mean")
def mean_metric(theta) -> MetricValue:
    values, degenerate = _kernel_values(theta)
    return MetricValue("mean", matrix_mean(values), degenerate=degenerate)


@metric("ncn")
def ncn_metric(theta) -> MetricValue:
    values, degenerate = _kernel_values(theta)
    if degenerate:
        return MetricValue("ncn", float("-inf"), degenerate=True)
    eig = jacobi_eigen(values)
    lam_max = eig.lambda_max
    if lam_max <= 0.0:
        return MetricValue("ncn", float("-inf"), degenerate=True)
    lam_min = eig.lambda_min
    floor = NCN_FLOOR * lam_max
    if lam_min <= floor:
        return MetricValue("ncn", -lam_max / floor, degenerate=True)
    return MetricValue("ncn", -lam_max / lam_min)


@metric("lga", needs_labels=True)
def lga_metric(theta, labels) -> MetricValue:
    values, _ = _kernel_values(theta)
    target = label_matrix(labels)
    if target.values.shape != values.shape:
        raise ContractError(f"{target.values.shape[0]} labels for a {values.shape[0]}-sample kernel")
    k = values - matrix_mean(values)
    y = target.values - matrix_mean(target.values)
    k_norm = frobenius_norm(k)
    y_norm = frobenius_norm(y)
    if k_norm <= LGA_FLOOR * max(frobenius_norm(values), 1.0) or y_norm == 0.0:
        return MetricValue("lga", 0.0, degenerate=True)
    value = float(np.sum(k * y) / (k_norm * y_norm))
    return MetricValue("lga", min(1.0, max(-1.0, value)))


def label_alignment(theta, labels, class_count: int | None = None) -> float:
    """
    Raw alignment y^T K y summed over the one-vs-all +-1 target columns.
    Reported for inspection only; ranking uses the normalized lga.
    """
    values, _ = _kernel_values(theta)
    labels = np.asarray(labels, dtype=np.int64)
    class_count = class_count or int(labels.max()) + 1
    targets = -np.ones((labels.size, class_count))
    targets[np.arange(labels.size), labels] = 1.0
    return float(np.einsum("ic,ij,jc->", targets, values, targets))


def score_kernel(theta, labels, metric_ids, epoch: int = 0) -> list[MetricValue]:
    return [get_metric(metric_id)(theta, labels).at_epoch(epoch) for metric_id in metric_ids]
