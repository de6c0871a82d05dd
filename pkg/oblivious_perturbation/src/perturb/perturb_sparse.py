"""Sparse trimmed part of the perturbation"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..common.common_errors import InvalidArgumentError
from ..rng.rng_bit_source import BitSource
from ..operator.operator_linear import LinearOperator

@dataclass
class HeavyRowStats:
    """Trimmed rows against the expected-count bound n e^-K (eK/L)^L"""

    n : int
    k : int
    l : int
    trimmed : int
    proof_variant : int
    bound : float

    def to_dict(self) -> dict:
        """Returns a JSON-friendly dictionary"""
        return {
            "n": self.n,
            "K": self.k,
            "L": self.l,
            "trimmed": self.trimmed,
            "proof_variant": self.proof_variant,
            "bound": self.bound,
        }

def heavy_row_bound(n : int, k : int, l : int) -> float:
    """Returns n e^-K (eK/L)^L evaluated in extended precision"""
    n_, k_, l_ = np.longdouble(n), np.longdouble(k), np.longdouble(l)
    return float(np.exp(np.log(n_) - k_ + l_ * (np.longdouble(1) + np.log(k_ / l_))))

class SparsePerturbation:
    """R2: column i holds signs X_{l,i}/L on the sorted K-subset J_i, rows of H-bar with more than L ones are zeroed

    subsets are 1-based, row i of subsets is J_i and row i of signs is aligned
    with the sorted positions of J_i.
    """

    def __init__(self,
            n : int,
            k : int,
            l : int,
            subsets : np.ndarray,
            signs : np.ndarray,
            bit_report : dict[str, int] | None = None) -> None:
        if not 1 <= k <= n:
            raise InvalidArgumentError(f"need 1 <= K <= n, got K={k}, n={n}")
        if l <= k:
            raise InvalidArgumentError(f"need K < L, got K={k}, L={l}")
        subsets = np.array(subsets, dtype=np.int64)
        signs = np.array(signs, dtype=np.int8)
        if subsets.shape != (n, k) or signs.shape != (n, k):
            raise InvalidArgumentError(f"subsets and signs must have shape ({n}, {k})")
        if subsets.min() < 1 or subsets.max() > n:
            raise InvalidArgumentError(f"subset indices must lie in [1, {n}]")
        if k > 1 and not np.all(np.diff(subsets, axis=1) > 0):
            raise InvalidArgumentError("each subset must be strictly increasing")
        if not np.all(np.abs(signs) == 1):
            raise InvalidArgumentError("signs must be +1 or -1")
        rows = subsets - 1
        counts = np.bincount(rows.ravel(), minlength=n)
        heavy = counts > l
        values = signs.astype(np.float64) / l * (~heavy[rows])
        columns = np.repeat(np.arange(n), k)
        matrix = sparse.csc_matrix((values.ravel(), (rows.ravel(), columns)), shape=(n, n))
        matrix.eliminate_zeros()
        for array in (subsets, signs, rows, heavy):
            array.setflags(write=False)
        self.__n : int = n
        self.__k : int = k
        self.__l : int = l
        self.__subsets : np.ndarray = subsets
        self.__signs : np.ndarray = signs
        self.__rows : np.ndarray = rows
        self.__heavy : np.ndarray = heavy
        self.__matrix : sparse.csc_matrix = matrix
        self.__bit_report : dict[str, int] = dict(bit_report or {})

    @property
    def n(self) -> int:
        """Returns dimension"""
        return self.__n

    @property
    def k(self) -> int:
        """Returns subset size"""
        return self.__k

    @property
    def l(self) -> int:
        """Returns row threshold"""
        return self.__l

    @property
    def scale(self) -> float:
        """Returns 1/L"""
        return 1.0 / self.__l

    @property
    def subsets(self) -> np.ndarray:
        """Returns J_i as 1-based rows"""
        return self.__subsets

    @property
    def signs(self) -> np.ndarray:
        """Returns X_{l,i} aligned with subsets"""
        return self.__signs

    @property
    def bit_report(self) -> dict[str, int]:
        """Returns bits consumed per component when built from a source"""
        return dict(self.__bit_report)

    @property
    def heavy_mask(self) -> np.ndarray:
        """Returns True for rows of H-bar with more than L ones"""
        return self.__heavy

    @property
    def matrix(self) -> sparse.csc_matrix:
        """Returns R2 in compressed sparse column form, at most nK stored entries"""
        return self.__matrix

    def apply(self, x : np.ndarray) -> np.ndarray:
        """Returns R2 x in O(nK)"""
        return self.__matrix @ self.__check(x)

    def apply_transpose(self, y : np.ndarray) -> np.ndarray:
        """Returns R2^T y in O(nK)"""
        return self.__matrix.T @ self.__check(y)

    def __check(self, x : np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.__n,):
            raise InvalidArgumentError(f"sparse perturbation expects a vector of length {self.__n}, got shape {x.shape}")
        return x

    def to_dense(self) -> np.ndarray:
        """Returns R2 as a dense matrix"""
        return self.__matrix.toarray()

    def as_operator(self) -> LinearOperator:
        """Returns R2 as an exact operator"""
        return LinearOperator(self.__n, self.__n, self.apply, self.apply_transpose, norm_hint=1.0, name="sparse-perturbation")

    def proof_heavy_count(self) -> int:
        """Returns rows with at least L ones among the first n-1 columns of H-bar"""
        counts = np.bincount(self.__rows[:-1].ravel(), minlength=self.__n)
        return int(np.count_nonzero(counts >= self.__l))

    def heavy_row_stats(self) -> HeavyRowStats:
        """Returns trimmed-row count and its expected-count bound"""
        return HeavyRowStats(
            self.__n, self.__k, self.__l,
            int(np.count_nonzero(self.__heavy)),
            self.proof_heavy_count(),
            heavy_row_bound(self.__n, self.__k, self.__l))

    @classmethod
    def from_columns(cls, n : int, k : int, l : int, subsets, signs=None) -> "SparsePerturbation":
        """Builds R2 from explicit subsets, all signs +1 when signs is None"""
        subsets = np.array([sorted(subset) for subset in subsets], dtype=np.int64)
        if signs is None:
            signs = np.ones_like(subsets, dtype=np.int8)
        return cls(n, k, l, subsets, signs)

def build_r2(n : int, k : int, l : int, src : BitSource) -> SparsePerturbation:
    """Draws J_i and the signs column by column"""
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= K <= n, got K={k}, n={n}")
    if l <= k:
        raise InvalidArgumentError(f"need K < L, got K={k}, L={l}")
    subsets = np.empty((n, k), dtype=np.int64)
    signs = np.empty((n, k), dtype=np.int8)
    subset_bits = 0
    sign_bits = 0
    for i in range(n):
        before = src.bits_consumed
        subsets[i] = src.sample_k_subset(n, k)
        middle = src.bits_consumed
        signs[i] = src.next_signs(k)
        subset_bits += middle - before
        sign_bits += src.bits_consumed - middle
    sparse = SparsePerturbation(n, k, l, subsets, signs, {"sparse_subsets": subset_bits, "sparse_signs": sign_bits})
    logging.debug("Built sparse part n=%d K=%d L=%d, %d heavy rows", n, k, l, int(sparse.heavy_mask.sum()))
    return sparse
