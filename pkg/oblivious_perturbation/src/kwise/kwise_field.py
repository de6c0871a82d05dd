"""Binary extension field arithmetic"""

from functools import lru_cache

import numpy as np

from ..common.common_errors import CapabilityError, InvalidArgumentError

# Exponents of the pinned reduction polynomial per degree, highest first.
REDUCTION_EXPONENTS : dict[int, tuple[int, ...]] = {
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 4, 3, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 6, 5, 3, 2, 1, 0),
    11: (11, 2, 0),
    12: (12, 7, 6, 5, 3, 1, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 7, 5, 3, 0),
    15: (15, 5, 4, 2, 0),
    16: (16, 5, 3, 2, 0),
    17: (17, 3, 0),
    18: (18, 12, 10, 1, 0),
    19: (19, 5, 2, 1, 0),
    20: (20, 10, 9, 7, 6, 5, 4, 1, 0),
    21: (21, 6, 5, 2, 0),
    22: (22, 12, 11, 10, 9, 8, 6, 5, 0),
    23: (23, 5, 0),
    24: (24, 16, 15, 14, 13, 10, 9, 7, 5, 3, 0),
    25: (25, 8, 6, 2, 0),
    26: (26, 14, 10, 8, 7, 6, 4, 1, 0),
    27: (27, 12, 10, 9, 7, 5, 3, 2, 0),
    28: (28, 13, 7, 6, 5, 2, 0),
    29: (29, 2, 0),
    30: (30, 17, 16, 13, 11, 7, 5, 3, 2, 1, 0),
    31: (31, 3, 0),
    32: (32, 15, 9, 7, 4, 3, 0),
    33: (33, 13, 12, 11, 10, 8, 6, 3, 0),
    34: (34, 16, 15, 12, 11, 8, 7, 6, 5, 4, 2, 1, 0),
    35: (35, 11, 10, 7, 5, 2, 0),
    36: (36, 23, 22, 20, 19, 17, 14, 13, 8, 6, 5, 1, 0),
    37: (37, 5, 4, 3, 2, 1, 0),
    38: (38, 14, 10, 9, 8, 5, 2, 1, 0),
    39: (39, 15, 12, 11, 10, 9, 7, 6, 5, 2, 0),
    40: (40, 23, 21, 18, 16, 15, 13, 12, 8, 5, 3, 1, 0),
    41: (41, 3, 0),
    42: (42, 7, 0),
    43: (43, 6, 4, 3, 0),
    44: (44, 5, 0),
    45: (45, 4, 3, 1, 0),
    46: (46, 1, 0),
    47: (47, 5, 0),
    48: (48, 5, 3, 2, 0),
    49: (49, 9, 0),
    50: (50, 4, 3, 2, 0),
    51: (51, 6, 3, 1, 0),
    52: (52, 3, 0),
    53: (53, 6, 2, 1, 0),
    54: (54, 9, 0),
    55: (55, 7, 0),
    56: (56, 7, 4, 2, 0),
    57: (57, 4, 0),
    58: (58, 19, 0),
    59: (59, 7, 4, 2, 0),
    60: (60, 1, 0),
    61: (61, 5, 2, 1, 0),
    62: (62, 29, 0),
    63: (63, 1, 0),
    64: (64, 4, 3, 1, 0),
}

SUPPORTED_DEGREES : tuple[int, ...] = tuple(sorted(REDUCTION_EXPONENTS))

def polynomial_from_exponents(exponents : tuple[int, ...]) -> int:
    """Returns the integer encoding of a GF(2) polynomial"""
    value = 0
    for exponent in exponents:
        value ^= 1 << exponent
    return value

def polynomial_mod(dividend : int, divisor : int) -> int:
    """Returns dividend mod divisor over GF(2)"""
    divisor_degree = divisor.bit_length() - 1
    while dividend and dividend.bit_length() - 1 >= divisor_degree:
        dividend ^= divisor << (dividend.bit_length() - 1 - divisor_degree)
    return dividend

def polynomial_mulmod(a : int, b : int, modulus : int) -> int:
    """Returns a*b mod modulus over GF(2)"""
    degree = modulus.bit_length() - 1
    a = polynomial_mod(a, modulus)
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> degree & 1:
            a ^= modulus
    return result

def polynomial_gcd(a : int, b : int) -> int:
    """Returns gcd(a, b) over GF(2)"""
    while b:
        a, b = b, polynomial_mod(a, b)
    return a

def _prime_factors(value : int) -> list[int]:
    factors = []
    candidate = 2
    while candidate * candidate <= value:
        if value % candidate == 0:
            factors.append(candidate)
            while value % candidate == 0:
                value //= candidate
        candidate += 1
    if value > 1:
        factors.append(value)
    return factors

def _frobenius(polynomial : int, times : int) -> int:
    """Returns x^(2^times) mod polynomial"""
    power = polynomial_mod(2, polynomial)
    for _ in range(times):
        power = polynomial_mulmod(power, power, polynomial)
    return power

def is_irreducible(polynomial : int) -> bool:
    """Returns True if the GF(2) polynomial is irreducible (Rabin's test)

    A degree-d polynomial f is irreducible iff x^(2^d) = x mod f and
    gcd(x^(2^(d/q)) - x, f) = 1 for every prime q dividing d.
    """
    degree = polynomial.bit_length() - 1
    if degree < 1:
        return False
    x = polynomial_mod(2, polynomial)
    if _frobenius(polynomial, degree) != x:
        return False
    return all(polynomial_gcd(_frobenius(polynomial, degree // q) ^ x, polynomial) == 1 for q in _prime_factors(degree))

def field_degree_for(domain : int) -> int:
    """Returns the smallest supported degree m with 2^m >= domain and m >= 3"""
    if domain < 1:
        raise InvalidArgumentError(f"domain size must be positive, got {domain}")
    needed = max(3, (domain - 1).bit_length())
    for m in SUPPORTED_DEGREES:
        if m >= needed:
            return m
    raise CapabilityError(f"no supported field holds a domain of {domain} indices")

class GFContext:
    """GF(2^m) with a pinned reduction polynomial"""

    def __init__(self, m : int) -> None:
        if m not in REDUCTION_EXPONENTS:
            raise CapabilityError(f"field degree {m} is not supported, choose one of {SUPPORTED_DEGREES}")
        self.__m : int = m
        self.__polynomial : int = polynomial_from_exponents(REDUCTION_EXPONENTS[m])
        self.__low : int = self.__polynomial ^ (1 << m)
        self.__mask : int = (1 << m) - 1

    @property
    def m(self) -> int:
        """Returns field degree"""
        return self.__m

    @property
    def polynomial(self) -> int:
        """Returns reduction polynomial including the x^m term"""
        return self.__polynomial

    @property
    def order(self) -> int:
        """Returns the number of field elements"""
        return 1 << self.__m

    def check_element(self, value : int) -> None:
        """Raises if value is not a field element"""
        if value < 0 or value > self.__mask:
            raise InvalidArgumentError(f"{value} is outside GF(2^{self.__m})")

    def multiply(self, a : int, b : int) -> int:
        """Returns a*b for scalar elements"""
        result = 0
        top = 1 << (self.__m - 1)
        while b:
            if b & 1:
                result ^= a
            b >>= 1
            carry = a & top
            a = (a << 1) & self.__mask
            if carry:
                a ^= self.__low
        return result

    def power(self, a : int, exponent : int) -> int:
        """Returns a^exponent"""
        result = 1
        while exponent:
            if exponent & 1:
                result = self.multiply(result, a)
            a = self.multiply(a, a)
            exponent >>= 1
        return result

    def inverse(self, a : int) -> int:
        """Returns the multiplicative inverse of a nonzero element"""
        if a == 0:
            raise InvalidArgumentError("zero has no inverse")
        return self.power(a, self.order - 2)

    def multiply_array(self, a : np.ndarray, b : np.ndarray) -> np.ndarray:
        """Returns elementwise a*b over broadcast uint64 arrays"""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.uint64), np.asarray(b, dtype=np.uint64))
        a = a.copy()
        b = b.copy()
        result = np.zeros(a.shape, dtype=np.uint64)
        one = np.uint64(1)
        top_shift = np.uint64(self.__m - 1)
        mask = np.uint64(self.__mask)
        low = np.uint64(self.__low)
        for _ in range(self.__m):
            if not b.any():
                break
            result ^= a * (b & one)
            b >>= one
            carry = (a >> top_shift) & one
            a = (a << one) & mask
            a ^= carry * low
        return result

    def evaluate(self, coeffs : np.ndarray, x : np.ndarray) -> np.ndarray:
        """Returns sum_i c_i x^i by Horner's rule

        coeffs has the coefficient index on its last axis; leading axes broadcast
        against x.
        """
        coeffs = np.asarray(coeffs, dtype=np.uint64)
        x = np.asarray(x, dtype=np.uint64)
        accumulator = np.broadcast_to(coeffs[..., -1], np.broadcast_shapes(coeffs.shape[:-1], x.shape)).copy()
        for index in range(coeffs.shape[-1] - 2, -1, -1):
            accumulator = self.multiply_array(accumulator, x) ^ coeffs[..., index]
        return accumulator

@lru_cache(maxsize=None)
def get_context(m : int) -> GFContext:
    """Returns the shared context of degree m"""
    return GFContext(m)
