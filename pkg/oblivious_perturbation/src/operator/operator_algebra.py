"""Operator algebra with declared accuracy tags"""

from enum import Enum

import numpy as np

from ..common.common_errors import InvalidArgumentError
from .operator_linear import LinearOperator, MatvecCounter

SUM_TAG_FACTOR : float = 9.0
NORMAL_TAG_FACTOR : float = 3.0

class NoisePolicy(Enum):
    """How an inexact matvec perturbs exact outputs"""

    ADVERSARIAL = "adversarial"
    RANDOM = "random"
    ROUNDING = "rounding"

def parse_policy(value : "NoisePolicy | str") -> NoisePolicy:
    """Returns the policy named by value"""
    if isinstance(value, NoisePolicy):
        return value
    try:
        return NoisePolicy(value)
    except ValueError as error:
        choices = ", ".join(policy.value for policy in NoisePolicy)
        raise InvalidArgumentError(f"unknown noise policy {value!r}, choose one of {choices}") from error

def jitter(values : np.ndarray, eps : float, rng : np.random.Generator) -> np.ndarray:
    """Returns values * (1 + d) with d uniform on [-eps, eps] per entry"""
    if eps == 0.0:
        return values
    return values * (1.0 + rng.uniform(-eps, eps, size=np.shape(values)))

class _NoiseStream:
    """Per-call generators keyed by (seed, call index)"""

    def __init__(self, seed : int) -> None:
        self.__seed : int = seed
        self.__calls : MatvecCounter = MatvecCounter()

    def next(self) -> np.random.Generator:
        return np.random.default_rng([self.__seed, self.__calls.increment()])

def _perturb(exact : np.ndarray, w : np.ndarray, eps : float, norm_hint : float, policy : NoisePolicy,
        rng : np.random.Generator) -> np.ndarray:
    budget = eps * norm_hint * float(np.linalg.norm(w))
    if budget == 0.0:
        return exact
    if policy is NoisePolicy.ROUNDING:
        return jitter(exact, eps, rng)
    if policy is NoisePolicy.ADVERSARIAL:
        size = float(np.linalg.norm(exact))
        direction = exact / size if size > 0.0 else np.eye(1, exact.size).ravel()
        return exact + budget * direction
    direction = rng.standard_normal(exact.size)
    while not direction.any():
        direction = rng.standard_normal(exact.size)
    return exact + budget * rng.uniform() * direction / np.linalg.norm(direction)

def inexact_wrap(op : LinearOperator, eps : float, norm_hint : float,
        policy : "NoisePolicy | str" = NoisePolicy.ROUNDING, seed : int = 0) -> LinearOperator:
    """Returns an eps-matvec for op: output error at most eps * norm_hint * ||w||

    Rounding emulation applies a relative jitter of at most eps to every output
    coordinate, which satisfies the bound whenever norm_hint >= ||A||.
    """
    if not 0.0 <= eps < 1.0:
        raise InvalidArgumentError(f"eps must lie in [0, 1), got {eps}")
    if norm_hint <= 0.0:
        raise InvalidArgumentError(f"norm hint must be positive, got {norm_hint}")
    policy = parse_policy(policy)
    stream = _NoiseStream(seed)

    def matvec(w : np.ndarray) -> np.ndarray:
        return _perturb(op.apply(w), w, eps, norm_hint, policy, stream.next())

    def rmatvec(w : np.ndarray) -> np.ndarray:
        return _perturb(op.apply_transpose(w), w, eps, norm_hint, policy, stream.next())

    return LinearOperator(
        op.rows, op.cols, matvec, rmatvec if op.has_transpose else None,
        eps_mach=max(op.eps_mach, eps), norm_hint=norm_hint, children=(op,),
        name=f"inexact({op.name}, {policy.value})")

def _check_same_shape(op_a : LinearOperator, op_e : LinearOperator) -> None:
    if op_a.shape != op_e.shape:
        raise InvalidArgumentError(f"operator shapes differ: {op_a.shape} and {op_e.shape}")

def sum_op(op_a : LinearOperator, op_e : LinearOperator, arithmetic_eps : float | None = None, seed : int = 0) -> LinearOperator:
    """Returns A + E, declared tag 9 * max(input tags)

    The caller keeps ||E|| <= ||A|| / 2. The addition itself is rounded with
    arithmetic_eps, which defaults to the larger input tag.
    """
    _check_same_shape(op_a, op_e)
    tag = max(op_a.eps_mach, op_e.eps_mach)
    rounding = tag if arithmetic_eps is None else arithmetic_eps
    stream = _NoiseStream(seed)

    def matvec(w : np.ndarray) -> np.ndarray:
        return jitter(op_a.apply(w) + op_e.apply(w), rounding, stream.next())

    def rmatvec(w : np.ndarray) -> np.ndarray:
        return jitter(op_a.apply_transpose(w) + op_e.apply_transpose(w), rounding, stream.next())

    norm_hint = None
    if op_a.norm_hint is not None and op_e.norm_hint is not None:
        norm_hint = op_a.norm_hint + op_e.norm_hint
    return LinearOperator(
        op_a.rows, op_a.cols, matvec,
        rmatvec if op_a.has_transpose and op_e.has_transpose else None,
        eps_mach=SUM_TAG_FACTOR * tag, norm_hint=norm_hint, children=(op_a, op_e),
        name=f"({op_a.name} + {op_e.name})")

def normal_equations_op(op_a : LinearOperator, op_at : LinearOperator) -> LinearOperator:
    """Returns A^T A from separate A and A^T operators, declared tag 3 * max(input tags)"""
    if op_a.rows != op_at.cols or op_a.cols != op_at.rows:
        raise InvalidArgumentError(f"{op_a.shape} and {op_at.shape} are not transposes of each other")

    def matvec(w : np.ndarray) -> np.ndarray:
        return op_at.apply(op_a.apply(w))

    norm_hint = None if op_a.norm_hint is None else op_a.norm_hint ** 2
    return LinearOperator(
        op_a.cols, op_a.cols, matvec, matvec,
        eps_mach=NORMAL_TAG_FACTOR * max(op_a.eps_mach, op_at.eps_mach),
        norm_hint=norm_hint, children=(op_a, op_at),
        name=f"{op_at.name} {op_a.name}")

def scaled_op(op : LinearOperator, factor : float) -> LinearOperator:
    """Returns factor * A"""
    if not np.isfinite(factor):
        raise InvalidArgumentError(f"scale factor must be finite, got {factor}")

    def matvec(w : np.ndarray) -> np.ndarray:
        return factor * op.apply(w)

    def rmatvec(w : np.ndarray) -> np.ndarray:
        return factor * op.apply_transpose(w)

    return LinearOperator(
        op.rows, op.cols, matvec, rmatvec if op.has_transpose else None,
        eps_mach=op.eps_mach,
        norm_hint=None if op.norm_hint is None else abs(factor) * op.norm_hint,
        children=(op,), name=f"{factor:.3g}*{op.name}")

def rank_one_shifted(op : LinearOperator, shift : float) -> LinearOperator:
    """Returns A + shift * 1 1^T in O(n) extra work per product"""
    if not np.isfinite(shift):
        raise InvalidArgumentError(f"shift must be finite, got {shift}")
    if op.rows != op.cols:
        raise InvalidArgumentError(f"rank-one shift needs a square operator, got {op.shape}")

    def matvec(w : np.ndarray) -> np.ndarray:
        return op.apply(w) + shift * w.sum()

    def rmatvec(w : np.ndarray) -> np.ndarray:
        return op.apply_transpose(w) + shift * w.sum()

    norm_hint = None if op.norm_hint is None else op.norm_hint + abs(shift) * op.rows
    return LinearOperator(
        op.rows, op.cols, matvec, rmatvec if op.has_transpose else None,
        eps_mach=op.eps_mach, norm_hint=norm_hint, children=(op,),
        name=f"({op.name} + {shift:.3g}*11^T)")

def arithmetic_from_dense(matrix : np.ndarray, eps : float, seed : int = 0) -> LinearOperator:
    """Returns a dense matvec computed in emulated eps-arithmetic, declared tag 2 n^(3/2) eps

    Every product and every partial sum is rounded with an independent relative
    error in [-eps, eps].
    """
    matrix = np.array(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {matrix.shape}")
    if not 0.0 <= eps < 1.0:
        raise InvalidArgumentError(f"eps must lie in [0, 1), got {eps}")
    n = matrix.shape[0]
    stream = _NoiseStream(seed)

    def product(left : np.ndarray, w : np.ndarray) -> np.ndarray:
        rng = stream.next()
        terms = jitter(left * w[None, :], eps, rng)
        total = terms[:, 0].copy()
        for j in range(1, n):
            total = jitter(total + terms[:, j], eps, rng)
        return total

    matrix.setflags(write=False)
    return LinearOperator(
        n, n, lambda w: product(matrix, w), lambda w: product(matrix.T, w),
        eps_mach=2.0 * n ** 1.5 * eps, name="fl-dense")
