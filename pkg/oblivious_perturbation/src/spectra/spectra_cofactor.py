"""Cofactor normal vectors"""

import numpy as np

from ..common.common_errors import InvalidArgumentError

COFACTOR_MAX_DIM : int = 12

def cofactor_normal(columns : np.ndarray) -> np.ndarray:
    """Returns zeta with zeta_r = (-1)^r det(B without row r) for the n x (n-1) matrix B

    zeta is orthogonal to every column of B and vanishes when B is rank deficient.
    """
    columns = np.asarray(columns, dtype=np.float64)
    if columns.ndim != 2:
        raise InvalidArgumentError(f"expected an n x (n-1) array, got shape {columns.shape}")
    n, count = columns.shape
    if count != n - 1 or n < 2:
        raise InvalidArgumentError(f"expected n-1 columns with n >= 2, got shape {columns.shape}")
    if n > COFACTOR_MAX_DIM:
        raise InvalidArgumentError(f"cofactor expansion is limited to n <= {COFACTOR_MAX_DIM}, got {n}")
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    minors = np.array([np.linalg.det(np.delete(columns, r, axis=0)) for r in range(n)])
    return signs * minors
