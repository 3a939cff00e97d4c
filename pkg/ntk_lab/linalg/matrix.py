from typing import Any

import numpy as np

from ntk_lab.errors import ContractError, DegenerateError


def as_matrix(data: Any, name: str = "matrix") -> np.ndarray:
    """
    Validates and converts input into a dense 2-D float64 array.

    Raises:
    ContractError: If the input is not 2-D or holds NaN/Inf entries.
    """
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} contains non-finite entries")
    return a


def frobenius_norm(a: np.ndarray) -> float:
    a = as_matrix(a)
    return float(np.sqrt(np.sum(a * a)))


def matrix_mean(a: np.ndarray) -> float:
    a = as_matrix(a)
    if a.size == 0:
        raise ContractError("matrix_mean of an empty matrix")
    return float(np.sum(a) / a.size)


def pearson_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """
    Pearson correlation over the flattened entries of two same-shape matrices.

    Raises:
    ContractError: On shape mismatch.
    DegenerateError: If either matrix is constant.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ContractError(f"Shape mismatch: {a.shape} vs {b.shape}")
    da = a.ravel() - a.mean()
    db = b.ravel() - b.mean()
    na = np.sqrt(np.dot(da, da))
    nb = np.sqrt(np.dot(db, db))
    if na == 0.0 or nb == 0.0:
        raise DegenerateError("Pearson correlation of a constant matrix is undefined")
    r = float(np.dot(da, db) / (na * nb))
    return min(1.0, max(-1.0, r))
