"""Dense spectral oracle"""

import logging
from dataclasses import dataclass

import numpy as np

from ..common.common_errors import CapabilityError, ConvergenceError, InvalidArgumentError
from ..common.common_settings import Settings
from ..operator.operator_linear import LinearOperator

JACOBI_TOLERANCE : float = 1e-14
JACOBI_MAX_SWEEPS : int = 60

@dataclass
class SpectralReport:
    """Singular values in descending order with their right singular vectors"""

    singular_values : np.ndarray
    method : str
    sweeps : int
    residual : float
    right_vectors : np.ndarray
    left_vectors : np.ndarray

    @property
    def s_1(self) -> float:
        """Returns the largest singular value"""
        return float(self.singular_values[0])

    @property
    def s_n(self) -> float:
        """Returns the smallest singular value"""
        return float(self.singular_values[-1])

    @property
    def kappa(self) -> float:
        """Returns s_1 / s_n, infinite when s_n is at or below machine precision times n s_1"""
        if self.s_n <= np.finfo(np.float64).eps * self.singular_values.size * self.s_1:
            return float("inf")
        return self.s_1 / self.s_n

    def to_dict(self) -> dict:
        """Returns a JSON-friendly dictionary"""
        return {
            "singular_values": [float(value) for value in self.singular_values],
            "s_1": self.s_1,
            "s_n": self.s_n,
            "kappa": self.kappa if np.isfinite(self.kappa) else "inf",
            "method": self.method,
            "sweeps": self.sweeps,
            "residual": self.residual,
        }

def check_cap(size : int, cap : int | None = None) -> int:
    """Raises CapabilityError if size exceeds the oracle cap"""
    cap = Settings.oracle_cap if cap is None else cap
    if size > cap:
        raise CapabilityError(f"dimension {size} exceeds the dense oracle cap {cap}")
    return cap

def materialize(op : LinearOperator, cap : int | None = None) -> np.ndarray:
    """Returns the dense matrix of op, one basis vector at a time"""
    check_cap(max(op.rows, op.cols), cap)
    dense = np.empty((op.rows, op.cols), dtype=np.float64)
    basis = np.zeros(op.cols, dtype=np.float64)
    for j in range(op.cols):
        basis[j] = 1.0
        dense[:, j] = op.apply(basis)
        basis[j] = 0.0
    return dense

def round_robin(size : int):
    """Yields size-1 rounds of disjoint index pairs covering every pair once"""
    order = np.arange(size)
    half = size // 2
    for _ in range(size - 1):
        yield order[:half].copy(), order[half:][::-1].copy()
        order = np.concatenate((order[:1], np.roll(order[1:], 1)))

def _rotate(work : np.ndarray, right : np.ndarray, p : np.ndarray, q : np.ndarray, threshold : float) -> bool:
    wp = work[:, p]
    wq = work[:, q]
    alpha = np.einsum("ij,ij->j", wp, wp)
    beta = np.einsum("ij,ij->j", wq, wq)
    gamma = np.einsum("ij,ij->j", wp, wq)
    active = (np.abs(gamma) > JACOBI_TOLERANCE * np.sqrt(alpha * beta)) & (np.abs(gamma) > threshold)
    if not active.any():
        return False
    p, q = p[active], q[active]
    alpha, beta, gamma = alpha[active], beta[active], gamma[active]
    zeta = (beta - alpha) / (2.0 * gamma)
    t = np.where(zeta >= 0.0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
    c = 1.0 / np.hypot(1.0, t)
    s = c * t
    for matrix in (work, right):
        mp = matrix[:, p].copy()
        mq = matrix[:, q]
        matrix[:, p] = c * mp - s * mq
        matrix[:, q] = s * mp + c * mq
    return True

def jacobi_svd(matrix : np.ndarray, max_sweeps : int = JACOBI_MAX_SWEEPS) -> SpectralReport:
    """One-sided Jacobi with round-robin rotation rounds"""
    rows, cols = matrix.shape
    padded = cols + cols % 2
    work = np.zeros((rows, padded), dtype=np.float64)
    work[:, :cols] = matrix
    right = np.eye(padded)
    frobenius = float(np.linalg.norm(matrix))
    threshold = (JACOBI_TOLERANCE * frobenius) ** 2
    sweeps = 0
    if frobenius > 0.0 and padded > 1:
        for sweeps in range(1, max_sweeps + 1):
            rotated = False
            for p, q in round_robin(padded):
                rotated |= _rotate(work, right, p, q, threshold)
            if not rotated:
                break
        else:
            logging.error("Jacobi SVD of a %dx%d matrix did not converge in %d sweeps", rows, cols, max_sweeps)
            raise ConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")
    work = work[:, :cols]
    right = right[:cols, :cols]
    sigma = np.linalg.norm(work, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    right = right[:, order]
    work = work[:, order]
    left = np.zeros_like(work)
    nonzero = sigma > 0.0
    left[:, nonzero] = work[:, nonzero] / sigma[nonzero]
    return SpectralReport(sigma, "jacobi", sweeps, _residual(matrix, sigma, right, frobenius), right, left)

def lapack_svd(matrix : np.ndarray) -> SpectralReport:
    """numpy.linalg.svd, kept for cross-checks and large sweeps"""
    rows, cols = matrix.shape
    left, sigma, right_t = np.linalg.svd(matrix)
    values = np.zeros(cols)
    values[:sigma.size] = sigma
    right = right_t.T
    padded_left = np.zeros((rows, cols))
    padded_left[:, :min(rows, cols)] = left[:, :min(rows, cols)]
    return SpectralReport(values, "lapack", 0, _residual(matrix, values, right, float(np.linalg.norm(matrix))), right, padded_left)

def _residual(matrix : np.ndarray, sigma : np.ndarray, right : np.ndarray, frobenius : float) -> float:
    if frobenius == 0.0:
        return 0.0
    gram = matrix.T @ matrix
    rebuilt = (right * sigma ** 2) @ right.T
    return float(np.linalg.norm(gram - rebuilt) / frobenius ** 2)

def svd_small(matrix : np.ndarray, cap : int | None = None, method : str = "jacobi") -> SpectralReport:
    """Returns the spectral report of a dense matrix"""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise InvalidArgumentError(f"expected a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise InvalidArgumentError("matrix has non-finite entries")
    check_cap(max(matrix.shape), cap)
    if method == "jacobi":
        report = jacobi_svd(matrix)
    elif method == "lapack":
        report = lapack_svd(matrix)
    else:
        raise InvalidArgumentError(f"unknown SVD method {method!r}")
    logging.debug("SVD %s of %dx%d: s_1=%g s_n=%g sweeps=%d", method, *matrix.shape, report.s_1, report.s_n, report.sweeps)
    return report

def spectral_norm(matrix : np.ndarray, method : str = "jacobi") -> float:
    """Returns the largest singular value"""
    return svd_small(matrix, method=method).s_1

def null_vector(columns : np.ndarray) -> np.ndarray:
    """Returns a unit vector orthogonal to the n-1 given columns of an n x (n-1) array"""
    columns = np.asarray(columns, dtype=np.float64)
    n, count = columns.shape
    if count != n - 1:
        raise InvalidArgumentError(f"expected n-1 = {n - 1} columns, got {count}")
    report = svd_small(columns.T)
    vector = report.right_vectors[:, -1]
    return vector / np.linalg.norm(vector)
