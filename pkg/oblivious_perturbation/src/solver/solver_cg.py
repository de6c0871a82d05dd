"""Conjugate gradient on normal equations"""

import logging
from typing import Callable
from dataclasses import dataclass, field

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..common.common_settings import Settings
from ..operator.operator_linear import LinearOperator

@dataclass
class CGResult:
    """Iterate, iteration count and recurrence residual history"""

    x : np.ndarray
    iterations : int
    history : list[float] = field(default_factory=list)
    converged : bool = False
    breakdown : bool = False
    true_residual : float | None = None

def cg_normal_equations(
        op_m : LinearOperator,
        v : np.ndarray,
        tol : float,
        max_iter : int,
        residual : Callable[[np.ndarray], float] | None = None,
        cadence : int | None = None) -> CGResult:
    """Runs CG on M x = v from x = 0

    Without `residual` the recurrence residual ||v - M x|| is compared to tol.
    With it, convergence is decided only by residual(x), evaluated every
    `cadence` iterations and when the recurrence stalls. Working storage is the
    four vectors x, r, p and M p.
    """
    if op_m.rows != op_m.cols:
        raise InvalidArgumentError(f"CG needs a square operator, got {op_m.shape}")
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (op_m.cols,):
        raise InvalidArgumentError(f"right-hand side has shape {v.shape}, expected ({op_m.cols},)")
    if tol < 0.0 or max_iter < 0:
        raise InvalidArgumentError(f"need tol >= 0 and max_iter >= 0, got {tol}, {max_iter}")
    cadence = Settings.residual_cadence if cadence is None else cadence
    x = np.zeros_like(v)
    r = v.copy()
    p = r.copy()
    rr = float(r @ r)
    result = CGResult(x, 0)

    def finished() -> bool:
        if residual is None:
            return np.sqrt(rr) <= tol
        result.true_residual = residual(x)
        return result.true_residual <= tol

    if rr == 0.0 or (residual is None and finished()):
        result.converged = finished()
        return result
    for iteration in range(1, max_iter + 1):
        q = op_m.apply(p)
        pq = float(p @ q)
        if pq <= 0.0:
            result.breakdown = True
            logging.warning("CG breakdown at iteration %d: p.Mp = %.3e, operator not positive definite along p", iteration, pq)
            result.converged = finished()
            break
        step = rr / pq
        x += step * p
        r -= step * q
        rr_next = float(r @ r)
        beta = rr_next / rr
        rr = rr_next
        result.iterations = iteration
        result.history.append(float(np.sqrt(rr)))
        stalled = rr == 0.0
        if residual is None or iteration % cadence == 0 or stalled or iteration == max_iter:
            if finished():
                result.converged = True
                break
        if stalled:
            break
        p *= beta
        p += r
    logging.debug("CG stopped after %d iterations, converged=%s", result.iterations, result.converged)
    return result
