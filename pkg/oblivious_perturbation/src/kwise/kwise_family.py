"""k-wise independent sign families"""

import logging
from itertools import combinations
from dataclasses import dataclass, field

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..rng.rng_bit_source import BitSource
from .kwise_field import GFContext, get_context

class KWiseSignFamily:
    """Random degree-(k-1) polynomial over GF(2^m), the low bit of its value is the sign bit"""

    def __init__(self, k : int, ctx : GFContext, coeffs : tuple[int, ...]) -> None:
        if k < 1 or len(coeffs) != k:
            raise InvalidArgumentError(f"family of degree {k} needs {k} coefficients, got {len(coeffs)}")
        for coeff in coeffs:
            ctx.check_element(coeff)
        self.__k : int = k
        self.__ctx : GFContext = ctx
        self.__coeffs : tuple[int, ...] = tuple(int(coeff) for coeff in coeffs)

    @property
    def k(self) -> int:
        """Returns independence degree"""
        return self.__k

    @property
    def ctx(self) -> GFContext:
        """Returns field context"""
        return self.__ctx

    @property
    def m(self) -> int:
        """Returns field degree"""
        return self.__ctx.m

    @property
    def coeffs(self) -> tuple[int, ...]:
        """Returns coefficients c_0..c_{k-1}"""
        return self.__coeffs

    def value_at(self, index : int) -> int:
        """Returns the polynomial value at a field element"""
        self.__ctx.check_element(index)
        accumulator = self.__coeffs[-1]
        for coeff in reversed(self.__coeffs[:-1]):
            accumulator = self.__ctx.multiply(accumulator, index) ^ coeff
        return accumulator

    def sign_at(self, index : int) -> int:
        """Returns +1 or -1 at index"""
        return 1 - 2 * (self.value_at(index) & 1)

    def signs_at(self, indices : np.ndarray) -> np.ndarray:
        """Returns int8 signs at an array of indices"""
        indices = np.asarray(indices, dtype=np.uint64)
        if indices.size and int(indices.max()) >= self.__ctx.order:
            raise InvalidArgumentError(f"index {int(indices.max())} is outside GF(2^{self.m})")
        bits = self.__ctx.evaluate(np.array(self.__coeffs, dtype=np.uint64), indices) & np.uint64(1)
        return (1 - 2 * bits.astype(np.int8)).astype(np.int8)

    def __eq__(self, other : object) -> bool:
        if not isinstance(other, KWiseSignFamily):
            return NotImplemented
        return self.__k == other.k and self.m == other.m and self.__coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.__k, self.m, self.__coeffs))

    def __repr__(self) -> str:
        return f"KWiseSignFamily(k={self.__k}, m={self.m}, coeffs={self.__coeffs})"

def draw_coefficients(k : int, m : int, src : BitSource) -> tuple[int, ...]:
    """Draws k field elements, m bits each"""
    return tuple(src.next_int(m) for _ in range(k))

def make_family(k : int, m : int, src : BitSource, domain : int | None = None) -> KWiseSignFamily:
    """Returns a family with coefficients uniform in GF(2^m)^k, consuming k*m bits"""
    if k < 1:
        raise InvalidArgumentError(f"independence degree must be at least 1, got {k}")
    ctx = get_context(m)
    if domain is not None and domain > ctx.order:
        raise InvalidArgumentError(f"domain of {domain} indices does not fit GF(2^{m})")
    return KWiseSignFamily(k, ctx, draw_coefficients(k, m, src))

@dataclass
class KWiseAudit:
    """Result of an exhaustive k-wise uniformity check"""

    m : int
    k : int
    families : int
    tuples_checked : int
    uniform : bool
    max_deviation : int
    pairwise_uncorrelated : bool
    bias_free : bool
    failures : list = field(default_factory=list)

    def to_dict(self) -> dict:
        """Returns a JSON-friendly dictionary"""
        return {
            "m": self.m,
            "k": self.k,
            "families": self.families,
            "tuples_checked": self.tuples_checked,
            "uniform": self.uniform,
            "max_deviation": self.max_deviation,
            "pairwise_uncorrelated": self.pairwise_uncorrelated,
            "bias_free": self.bias_free,
        }

def all_family_bits(m : int, k : int) -> np.ndarray:
    """Returns the sign bits of every family at every point, shape (2^(m*k), 2^m)"""
    ctx = get_context(m)
    count = 1 << (m * k)
    index = np.arange(count, dtype=np.uint64)
    coeffs = np.stack([(index >> np.uint64(m * t)) & np.uint64(ctx.order - 1) for t in range(k)], axis=-1)
    points = np.arange(ctx.order, dtype=np.uint64)
    return (ctx.evaluate(coeffs[:, None, :], points) & np.uint64(1)).astype(np.int64)

def verify_kwise_uniformity(m : int, k : int) -> KWiseAudit:
    """Checks over the whole coefficient space that every k distinct points see uniform signs"""
    if m * k > 24:
        raise InvalidArgumentError(f"exhaustive audit of m={m}, k={k} enumerates too many families")
    bits = all_family_bits(m, k)
    families, points = bits.shape
    if k > points:
        raise InvalidArgumentError(f"k={k} exceeds the {points} points of GF(2^{m})")
    expected = families >> k
    weights = 1 << np.arange(k, dtype=np.int64)
    max_deviation = 0
    checked = 0
    failures = []
    for subset in combinations(range(points), k):
        patterns = bits[:, subset] @ weights
        counts = np.bincount(patterns, minlength=1 << k)
        deviation = int(np.abs(counts - expected).max())
        checked += 1
        if deviation:
            failures.append(subset)
        max_deviation = max(max_deviation, deviation)
    signs = 1 - 2 * bits
    pairwise = True
    if k >= 2:
        correlation = signs.T @ signs
        np.fill_diagonal(correlation, 0)
        pairwise = not correlation.any()
    bias_free = int(signs.sum()) == 0
    audit = KWiseAudit(m, k, families, checked, not failures, max_deviation, pairwise, bias_free, failures)
    logging.info("k-wise audit m=%d k=%d: %d tuples, uniform=%s", m, k, checked, audit.uniform)
    return audit
