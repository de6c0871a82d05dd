"""Matvec-only linear operators"""

from typing import Callable, Iterable

import numpy as np
from PySide6.QtCore import QMutex, QMutexLocker

from ..common.common_errors import CapabilityError, InvalidArgumentError

Matvec = Callable[[np.ndarray], np.ndarray]

class MatvecCounter:
    """Monotone query counter safe under concurrent applies"""

    def __init__(self) -> None:
        self.__mutex : QMutex = QMutex()
        self.__count : int = 0

    @property
    def count(self) -> int:
        """Returns number of queries"""
        with QMutexLocker(self.__mutex):
            return self.__count

    def increment(self) -> int:
        """Counts one query and returns the call index"""
        with QMutexLocker(self.__mutex):
            index = self.__count
            self.__count += 1
            return index

class LinearOperator:
    """Dimension-tagged operator exposing apply and apply_transpose

    eps_mach is the declared relative accuracy:
    ||apply(w) - Aw|| <= eps_mach * ||A|| * ||w|| for the represented A.
    Operators built from other operators list them as children; only leaves
    answer queries against an underlying matrix.
    """

    def __init__(self,
            rows : int,
            cols : int,
            matvec : Matvec,
            rmatvec : Matvec | None = None,
            eps_mach : float = 0.0,
            norm_hint : float | None = None,
            children : Iterable["LinearOperator"] = (),
            name : str = "operator") -> None:
        if rows < 1 or cols < 1:
            raise InvalidArgumentError(f"operator dimensions must be positive, got {rows}x{cols}")
        if not 0.0 <= eps_mach:
            raise InvalidArgumentError(f"declared accuracy must be non-negative, got {eps_mach}")
        self.__rows : int = rows
        self.__cols : int = cols
        self.__matvec : Matvec = matvec
        self.__rmatvec : Matvec | None = rmatvec
        self.__eps_mach : float = float(eps_mach)
        self.__norm_hint : float | None = norm_hint
        self.__children : tuple[LinearOperator, ...] = tuple(children)
        self.__name : str = name
        self.__counter : MatvecCounter = MatvecCounter()

    @property
    def rows(self) -> int:
        """Returns number of rows"""
        return self.__rows

    @property
    def cols(self) -> int:
        """Returns number of columns"""
        return self.__cols

    @property
    def shape(self) -> tuple[int, int]:
        """Returns (rows, cols)"""
        return self.__rows, self.__cols

    @property
    def eps_mach(self) -> float:
        """Returns declared relative accuracy"""
        return self.__eps_mach

    @property
    def norm_hint(self) -> float | None:
        """Returns an upper bound on the operator norm if one is known"""
        return self.__norm_hint

    @property
    def name(self) -> str:
        """Returns operator name"""
        return self.__name

    @property
    def children(self) -> tuple["LinearOperator", ...]:
        """Returns operators this one queries"""
        return self.__children

    @property
    def matvec_count(self) -> int:
        """Returns number of apply and apply_transpose calls on this operator"""
        return self.__counter.count

    @property
    def has_transpose(self) -> bool:
        """Returns True if apply_transpose is available"""
        return self.__rmatvec is not None

    def apply(self, w : np.ndarray) -> np.ndarray:
        """Returns A w"""
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.__cols,):
            raise InvalidArgumentError(f"{self.__name} expects a vector of length {self.__cols}, got shape {w.shape}")
        self.__counter.increment()
        return np.asarray(self.__matvec(w), dtype=np.float64)

    def apply_transpose(self, w : np.ndarray) -> np.ndarray:
        """Returns A^T w"""
        if self.__rmatvec is None:
            raise CapabilityError(f"{self.__name} has no transpose product")
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.__rows,):
            raise InvalidArgumentError(f"{self.__name} transpose expects a vector of length {self.__rows}, got shape {w.shape}")
        self.__counter.increment()
        return np.asarray(self.__rmatvec(w), dtype=np.float64)

    def transpose(self) -> "LinearOperator":
        """Returns a view representing A^T"""
        if self.__rmatvec is None:
            raise CapabilityError(f"{self.__name} has no transpose product")
        return LinearOperator(
            self.__cols, self.__rows,
            self.apply_transpose, self.apply,
            eps_mach=self.__eps_mach,
            norm_hint=self.__norm_hint,
            children=(self,),
            name=f"{self.__name}^T")

    def leaves(self) -> list["LinearOperator"]:
        """Returns the distinct leaf operators reachable from this one"""
        found : dict[int, LinearOperator] = {}
        stack : list[LinearOperator] = [self]
        while stack:
            op = stack.pop()
            if not op.children:
                found.setdefault(id(op), op)
            stack.extend(op.children)
        return list(found.values())

    def __repr__(self) -> str:
        return f"LinearOperator({self.__name}, {self.__rows}x{self.__cols}, eps_mach={self.__eps_mach:g})"

def count_queries(*ops : LinearOperator) -> int:
    """Returns total queries answered by the distinct leaves under ops"""
    seen : dict[int, LinearOperator] = {}
    for op in ops:
        for leaf in op.leaves():
            seen.setdefault(id(leaf), leaf)
    return sum(leaf.matvec_count for leaf in seen.values())

def exact_from_dense(matrix : np.ndarray, name : str = "dense") -> LinearOperator:
    """Returns an exact operator for a dense matrix"""
    matrix = np.array(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-D matrix, got {matrix.ndim} dimensions")
    if not np.isfinite(matrix).all():
        raise InvalidArgumentError("matrix has non-finite entries")
    matrix.setflags(write=False)
    rows, cols = matrix.shape
    return LinearOperator(rows, cols, matrix.__matmul__, matrix.T.__matmul__, name=name)
