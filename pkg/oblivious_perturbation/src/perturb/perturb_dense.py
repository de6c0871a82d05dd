"""Dense pattern part of the perturbation"""

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..rng.rng_bit_source import BitSource
from ..pattern.pattern_matrix import PatternMatrix
from ..operator.operator_linear import LinearOperator

class DensePerturbation:
    """R1 = diag(d1) V diag(d2) / (rho sqrt n)"""

    def __init__(self, pattern : PatternMatrix, d1 : np.ndarray, d2 : np.ndarray, rho : float) -> None:
        n = pattern.n
        d1 = np.array(d1, dtype=np.float64)
        d2 = np.array(d2, dtype=np.float64)
        if d1.shape != (n,) or d2.shape != (n,):
            raise InvalidArgumentError(f"sign diagonals must have length {n}")
        if not (np.all(np.abs(d1) == 1.0) and np.all(np.abs(d2) == 1.0)):
            raise InvalidArgumentError("sign diagonals must hold +1 or -1")
        if rho <= 0.0:
            raise InvalidArgumentError(f"rho must be positive, got {rho}")
        d1.setflags(write=False)
        d2.setflags(write=False)
        self.__pattern : PatternMatrix = pattern
        self.__d1 : np.ndarray = d1
        self.__d2 : np.ndarray = d2
        self.__rho : float = float(rho)
        self.__scale : float = 1.0 / (self.__rho * np.sqrt(n))

    @property
    def n(self) -> int:
        """Returns dimension"""
        return self.__pattern.n

    @property
    def pattern(self) -> PatternMatrix:
        """Returns pattern matrix"""
        return self.__pattern

    @property
    def d1(self) -> np.ndarray:
        """Returns row signs"""
        return self.__d1

    @property
    def d2(self) -> np.ndarray:
        """Returns column signs"""
        return self.__d2

    @property
    def rho(self) -> float:
        """Returns norm constant"""
        return self.__rho

    @property
    def scale(self) -> float:
        """Returns 1/(rho sqrt n)"""
        return self.__scale

    def apply(self, x : np.ndarray) -> np.ndarray:
        """Returns R1 x"""
        return self.__scale * self.__d1 * self.__pattern.apply(self.__d2 * np.asarray(x, dtype=np.float64))

    def apply_transpose(self, x : np.ndarray) -> np.ndarray:
        """Returns R1^T x"""
        return self.__scale * self.__d2 * self.__pattern.apply_transpose(self.__d1 * np.asarray(x, dtype=np.float64))

    def to_dense(self) -> np.ndarray:
        """Returns R1 as a dense matrix"""
        return self.__scale * (self.__d1[:, None] * self.__pattern.to_dense() * self.__d2[None, :])

    def as_operator(self) -> LinearOperator:
        """Returns R1 as an exact operator"""
        return LinearOperator(self.n, self.n, self.apply, self.apply_transpose, norm_hint=1.0, name="dense-perturbation")

def build_r1(n : int, pattern : PatternMatrix, src : BitSource, rho : float = 3.0) -> DensePerturbation:
    """Draws d1 and d2, exactly 2n bits"""
    if pattern.n != n:
        raise InvalidArgumentError(f"pattern matrix has dimension {pattern.n}, expected {n}")
    d1 = src.next_signs(n)
    d2 = src.next_signs(n)
    return DensePerturbation(pattern, d1, d2, rho)
