"""Walsh-Hadamard sparsity witness"""

from dataclasses import dataclass

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..spectra.spectra_oracle import check_cap

def fwht(vector : np.ndarray) -> np.ndarray:
    """Returns the unnormalized Walsh-Hadamard transform in natural (Sylvester) order"""
    result = np.array(vector, dtype=np.float64)
    n = result.size
    if n == 0 or n & (n - 1):
        raise InvalidArgumentError(f"transform length must be a power of two, got {n}")
    half = 1
    while half < n:
        blocks = result.reshape(-1, 2, half)
        upper = blocks[:, 0, :] + blocks[:, 1, :]
        lower = blocks[:, 0, :] - blocks[:, 1, :]
        result = np.stack((upper, lower), axis=1).reshape(n)
        half *= 2
    return result

@dataclass
class HadamardWitness:
    """Sparse vector whose transform is exactly as sparse as the uncertainty principle allows"""

    n : int
    x : np.ndarray
    hx : np.ndarray
    support_x : list[int]
    support_hx : list[int]

    def to_dict(self) -> dict:
        """Returns a JSON-friendly dictionary"""
        return {
            "n": self.n,
            "support_x_size": len(self.support_x),
            "support_hx_size": len(self.support_hx),
            "support_x": self.support_x,
            "support_hx": self.support_hx,
        }

def hadamard_sparse_witness(k : int, cap : int | None = None) -> HadamardWitness:
    """Returns x on n = 2^(2k) with x_j = 1 iff the top k of j's 2k bits are zero"""
    if k < 1:
        raise InvalidArgumentError(f"half-log dimension must be at least 1, got {k}")
    n = 1 << (2 * k)
    check_cap(n, cap)
    index = np.arange(n)
    x = ((index >> k) == 0).astype(np.float64)
    hx = fwht(x)
    return HadamardWitness(
        n, x, hx,
        [int(j) for j in np.flatnonzero(x)],
        [int(i) for i in np.flatnonzero(hx)])
