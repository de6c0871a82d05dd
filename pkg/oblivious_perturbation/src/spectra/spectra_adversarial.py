"""Adversarial input matrices for conditioning experiments"""

import logging
from dataclasses import dataclass

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..rng.rng_bit_source import BitSource
from .spectra_cofactor import COFACTOR_MAX_DIM, cofactor_normal
from .spectra_oracle import check_cap, null_vector, spectral_norm, svd_small

NEAR_SINGULAR_FLOOR : float = 1e-14
RANK_TOLERANCE : float = 1e-10

@dataclass
class AdversarialMatrix:
    """Unit-norm test matrix; critical_eps is the perturbation size that can make it singular, if known"""

    name : str
    matrix : np.ndarray
    critical_eps : float | None = None

def rank_one_matrix(n : int) -> np.ndarray:
    """Returns e_1 e_1^T"""
    matrix = np.zeros((n, n))
    matrix[0, 0] = 1.0
    return matrix

def jordan_matrix(n : int) -> np.ndarray:
    """Returns 0.5 I + N scaled to unit norm, N the upper shift"""
    matrix = 0.5 * np.eye(n) + np.eye(n, k=1)
    return matrix / spectral_norm(matrix)

def near_singular_matrix(n : int, src : BitSource) -> np.ndarray:
    """Returns Q1 diag(1, ..., 1, 1e-14) Q2 with Q1, Q2 from QR of Gaussian matrices"""
    rng = src.numpy_generator()
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    values = np.ones(n)
    values[-1] = NEAR_SINGULAR_FLOOR
    return (q1 * values) @ q2

def dense_trap_matrix(v_hat : np.ndarray) -> np.ndarray:
    """Returns (<col_1(V^), u> / (sqrt(n) u_j)) e_j e_1^T with u orthogonal to col_2..n(V^)

    For ||V^|| = 1 and eps = 1/sqrt(n), A + eps D1 V^ D2 is singular whenever
    the signs d1_j and d2_1 disagree. Returns the zero matrix when columns 2..n
    are rank deficient or col_1 is orthogonal to u.
    """
    v_hat = np.asarray(v_hat, dtype=np.float64)
    n = v_hat.shape[0]
    if v_hat.shape != (n, n) or n < 2:
        raise InvalidArgumentError(f"expected a square matrix with n >= 2, got shape {v_hat.shape}")
    rest = v_hat[:, 1:]
    matrix = np.zeros((n, n))
    report = svd_small(rest, method="lapack")
    if report.s_n <= RANK_TOLERANCE * report.s_1:
        logging.warning("Columns 2..%d of V^ are rank deficient, no dense trap matrix", n)
        return matrix
    u = cofactor_normal(rest) if n <= COFACTOR_MAX_DIM else null_vector(rest)
    u = u / np.linalg.norm(u)
    overlap = float(v_hat[:, 0] @ u)
    if abs(overlap) <= RANK_TOLERANCE * float(np.linalg.norm(v_hat[:, 0])):
        logging.warning("First column of V^ lies in the span of the others, no dense trap matrix")
        return matrix
    j = int(np.argmax(np.abs(u)))
    matrix[j, 0] = overlap / (np.sqrt(n) * u[j])
    return matrix


def adversarial_suite(n : int, v_hat : np.ndarray | None = None, src : BitSource | None = None) -> list[AdversarialMatrix]:
    """Returns rank-one, Jordan, near-singular and, given V^, the R1-defeating matrix, all of norm 1"""
    if n < 2:
        raise InvalidArgumentError(f"suite needs n >= 2, got {n}")
    check_cap(n)
    src = BitSource(0) if src is None else src
    suite = [
        AdversarialMatrix("rank_one", rank_one_matrix(n)),
        AdversarialMatrix("jordan", jordan_matrix(n)),
        AdversarialMatrix("near_singular", near_singular_matrix(n, src)),
    ]
    if v_hat is not None:
        matrix = dense_trap_matrix(v_hat)
        scale = float(np.abs(matrix).max())
        if scale == 0.0:
            logging.warning("No dense trap matrix for this V^, skipped")
        else:
            suite.append(AdversarialMatrix("dense_trap", matrix / scale, 1.0 / (np.sqrt(n) * scale)))
    return suite
