"""Pattern matrix module"""

import hashlib
import logging

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..common.common_settings import Settings
from ..rng.rng_bit_source import BitSource
from ..kwise.kwise_field import GFContext, field_degree_for, get_context
from ..kwise.kwise_family import KWiseSignFamily, draw_coefficients, make_family
from ..operator.operator_linear import LinearOperator

LOCAL_DEGREE : int = 4

class PatternMatrix:
    """Implicit +-1 matrix V = V1 * V2 * V3^T (entrywise)

    Entry (i, j) is sign1(i*n + j) * sign2_i(j) * sign3_j(i): one global family
    over the n^2 entry indices, one 4-wise family per row and one per column.
    Only the coefficients are stored; entries are streamed in row blocks.
    """

    def __init__(self,
            n : int,
            entry_family : KWiseSignFamily,
            row_coeffs : np.ndarray,
            col_coeffs : np.ndarray,
            local_degree : int) -> None:
        if n < 2:
            raise InvalidArgumentError(f"pattern matrix needs n >= 2, got {n}")
        if entry_family.ctx.order < n * n:
            raise InvalidArgumentError(f"entry family over GF(2^{entry_family.m}) cannot index {n * n} entries")
        row_coeffs = np.array(row_coeffs, dtype=np.uint64)
        col_coeffs = np.array(col_coeffs, dtype=np.uint64)
        if row_coeffs.shape[0] != n or col_coeffs.shape[0] != n or row_coeffs.shape != col_coeffs.shape:
            raise InvalidArgumentError("row and column families must be n coefficient vectors of equal degree")
        local_ctx = get_context(local_degree)
        if local_ctx.order < n:
            raise InvalidArgumentError(f"local field GF(2^{local_degree}) cannot index {n} rows")
        if row_coeffs.size and max(int(row_coeffs.max()), int(col_coeffs.max())) >= local_ctx.order:
            raise InvalidArgumentError("local coefficients fall outside their field")
        row_coeffs.setflags(write=False)
        col_coeffs.setflags(write=False)
        self.__n : int = n
        self.__entry_family : KWiseSignFamily = entry_family
        self.__row_coeffs : np.ndarray = row_coeffs
        self.__col_coeffs : np.ndarray = col_coeffs
        self.__local_ctx : GFContext = local_ctx
        self.__dense : np.ndarray | None = None

    @property
    def n(self) -> int:
        """Returns dimension"""
        return self.__n

    @property
    def entry_family(self) -> KWiseSignFamily:
        """Returns the family over entry indices"""
        return self.__entry_family

    @property
    def row_coeffs(self) -> np.ndarray:
        """Returns row family coefficients, shape (n, 4)"""
        return self.__row_coeffs

    @property
    def col_coeffs(self) -> np.ndarray:
        """Returns column family coefficients, shape (n, 4)"""
        return self.__col_coeffs

    @property
    def local_degree(self) -> int:
        """Returns the field degree of the row and column families"""
        return self.__local_ctx.m

    @property
    def bit_report(self) -> dict[str, int]:
        """Returns bits consumed per component"""
        local = self.__n * self.__row_coeffs.shape[1] * self.__local_ctx.m
        return {
            "pattern_v1": self.__entry_family.k * self.__entry_family.m,
            "pattern_v2": local,
            "pattern_v3": local,
        }

    def row_family(self, i : int) -> KWiseSignFamily:
        """Returns the family of row i"""
        return KWiseSignFamily(self.__row_coeffs.shape[1], self.__local_ctx, tuple(int(c) for c in self.__row_coeffs[i]))

    def column_family(self, j : int) -> KWiseSignFamily:
        """Returns the family of column j"""
        return KWiseSignFamily(self.__col_coeffs.shape[1], self.__local_ctx, tuple(int(c) for c in self.__col_coeffs[j]))

    def entry(self, i : int, j : int) -> int:
        """Returns V[i, j] for 0-based indices"""
        if not (0 <= i < self.__n and 0 <= j < self.__n):
            raise InvalidArgumentError(f"entry ({i}, {j}) outside a {self.__n}x{self.__n} matrix")
        return (self.__entry_family.sign_at(i * self.__n + j)
            * self.row_family(i).sign_at(j)
            * self.column_family(j).sign_at(i))

    def sign_block(self, start : int, stop : int) -> np.ndarray:
        """Returns rows start..stop-1 as an int8 array"""
        n = self.__n
        rows = np.arange(start, stop, dtype=np.uint64)[:, None]
        cols = np.arange(n, dtype=np.uint64)
        entry_ctx = self.__entry_family.ctx
        global_values = entry_ctx.evaluate(
            np.array(self.__entry_family.coeffs, dtype=np.uint64), rows * np.uint64(n) + cols)
        row_values = self.__local_ctx.evaluate(self.__row_coeffs[start:stop, None, :], cols)
        col_values = self.__local_ctx.evaluate(self.__col_coeffs, rows)
        bits = (global_values ^ row_values ^ col_values) & np.uint64(1)
        return (1 - 2 * bits.astype(np.int8)).astype(np.int8)

    def blocks(self):
        """Yields (start, stop, signs) row blocks within the streaming budget"""
        step = max(1, Settings.stream_block_entries // self.__n)
        for start in range(0, self.__n, step):
            stop = min(self.__n, start + step)
            yield start, stop, self.sign_block(start, stop)

    def to_dense(self) -> np.ndarray:
        """Returns V as a dense float64 matrix"""
        if self.__dense is not None:
            return self.__dense.copy()
        dense = np.empty((self.__n, self.__n), dtype=np.float64)
        for start, stop, signs in self.blocks():
            dense[start:stop] = signs
        return dense

    def __cached(self) -> np.ndarray | None:
        if self.__dense is None and self.__n <= Settings.pattern_cache_dim:
            dense = self.to_dense()
            dense.setflags(write=False)
            self.__dense = dense
            logging.debug("Cached %dx%d pattern signs", self.__n, self.__n)
        return self.__dense

    def __check(self, x : np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.__n,):
            raise InvalidArgumentError(f"pattern matrix expects a vector of length {self.__n}, got shape {x.shape}")
        return x

    def apply(self, x : np.ndarray) -> np.ndarray:
        """Returns V x"""
        x = self.__check(x)
        dense = self.__cached()
        if dense is not None:
            return dense @ x
        y = np.empty(self.__n, dtype=np.float64)
        for start, stop, signs in self.blocks():
            y[start:stop] = signs @ x
        return y

    def apply_transpose(self, x : np.ndarray) -> np.ndarray:
        """Returns V^T x"""
        x = self.__check(x)
        dense = self.__cached()
        if dense is not None:
            return dense.T @ x
        y = np.zeros(self.__n, dtype=np.float64)
        for start, stop, signs in self.blocks():
            y += signs.T @ x[start:stop]
        return y

    def as_operator(self) -> LinearOperator:
        """Returns V as an exact operator"""
        return LinearOperator(self.__n, self.__n, self.apply, self.apply_transpose, name="pattern")

    def checksum(self) -> str:
        """Returns the SHA-256 of the row-major int8 sign pattern"""
        digest = hashlib.sha256()
        for _, _, signs in self.blocks():
            digest.update(signs.tobytes())
        return digest.hexdigest()

def build_pattern(n : int, src : BitSource) -> PatternMatrix:
    """Draws all families of an n-dimensional pattern matrix from src"""
    if n < 2:
        raise InvalidArgumentError(f"pattern matrix needs n >= 2, got {n}")
    before = src.bits_consumed
    entry_degree = 2 * (n - 1).bit_length()
    entry_family = make_family(entry_degree, field_degree_for(n * n), src, domain=n * n)
    local_degree = field_degree_for(n)
    row_coeffs = np.array([draw_coefficients(LOCAL_DEGREE, local_degree, src) for _ in range(n)], dtype=np.uint64)
    col_coeffs = np.array([draw_coefficients(LOCAL_DEGREE, local_degree, src) for _ in range(n)], dtype=np.uint64)
    pattern = PatternMatrix(n, entry_family, row_coeffs, col_coeffs, local_degree)
    logging.info("Built pattern matrix n=%d with %d bits", n, src.bits_consumed - before)
    return pattern
