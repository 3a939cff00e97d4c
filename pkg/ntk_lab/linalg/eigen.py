import logging
from typing import NamedTuple

import numpy as np

from ntk_lab.errors import ContractError, ConvergenceError
from .matrix import as_matrix, frobenius_norm

logger = logging.getLogger(__name__)

MAX_SWEEPS = 50
DEFAULT_TOL = 1e-10
SYMMETRY_TOL = 1e-10


class EigenResult(NamedTuple):
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigen(a: np.ndarray, tol: float = DEFAULT_TOL) -> EigenResult:
    """
    Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over every (p, q) pair with p < q until the off-diagonal Frobenius
    norm drops to ``tol * max(1, ||a||_F)``.

    For ||a||_F <= 1 this is the absolute rule ``off(a) <= tol``. Above that
    the threshold grows with the norm: rotations leave off-diagonal rounding
    of order eps * ||a||_F * n, so an absolute 1e-10 cannot be reached on
    kernels with ||a||_F beyond roughly 1e4 and the sweep cap would fire on
    well-conditioned input.

    Parameters:
    a (np.ndarray): Square symmetric matrix.
    tol (float): Off-diagonal stopping threshold, relative to max(1, ||a||_F).

    Returns:
    EigenResult: Ascending eigenvalues with matching orthonormal eigenvectors.
    """
    a = as_matrix(a, "a")
    if tol <= 0:
        raise ContractError(f"tol must be positive, got {tol}")
    n, m = a.shape
    if n != m:
        raise ContractError(f"jacobi_eigen needs a square matrix, got {a.shape}")
    scale = max(1.0, frobenius_norm(a))
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ContractError("jacobi_eigen needs a symmetric matrix")

    work = (a + a.T) / 2.0
    vectors = np.eye(n)
    threshold = tol * scale

    for sweep in range(MAX_SWEEPS + 1):
        if _off_diagonal_norm(work) <= threshold:
            break
        if sweep == MAX_SWEEPS:
            raise ConvergenceError(
                f"Jacobi did not converge in {MAX_SWEEPS} sweeps "
                f"(off-diagonal norm {_off_diagonal_norm(work):.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - s * col_q
                work[:, q] = s * col_p + c * col_q
                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - s * row_q
                work[q, :] = s * row_p + c * row_q
                work[p, q] = work[q, p] = 0.0

                vec_p = vectors[:, p].copy()
                vec_q = vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q
        logger.debug(f"Jacobi sweep {sweep}: off-diagonal {_off_diagonal_norm(work):.3e}")

    eigenvalues = np.diag(work).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return EigenResult(eigenvalues[order], vectors[:, order])
