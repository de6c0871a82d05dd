"""Operator norm estimation from matvecs"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..common.common_errors import ConvergenceError, InvalidArgumentError
from ..rng.rng_bit_source import BitSource
from ..kwise.kwise_family import make_family
from ..kwise.kwise_field import field_degree_for
from ..operator.operator_linear import LinearOperator, count_queries

POWER_SHIFT : float = 1.0 / 8.0
START_RETRIES : int = 3

@dataclass
class NormEstimate:
    """Spectral norm estimate with the candidate ladder it came from"""

    z : float
    frobenius_estimate : float
    candidates : list[tuple[float, float]] = field(default_factory=list)
    matvecs_used : int = 0
    probe_seed : int = 0
    steps : int = 0

    def to_dict(self) -> dict:
        """Returns a JSON-friendly dictionary"""
        return {
            "z": self.z,
            "frobenius_estimate": self.frobenius_estimate,
            "candidates": [list(candidate) for candidate in self.candidates],
            "matvecs_used": self.matvecs_used,
            "probe_seed": self.probe_seed,
            "steps": self.steps,
        }

def hutchinson_norm(op : LinearOperator, probes : int, src : BitSource) -> float:
    """Returns sqrt(mean ||A r||^2) over pairwise-independent sign probes, a Frobenius norm estimate"""
    if probes < 1:
        raise InvalidArgumentError(f"need at least one probe, got {probes}")
    n = op.cols
    points = np.arange(n, dtype=np.uint64)
    degree = field_degree_for(n)
    total = 0.0
    for _ in range(probes):
        probe = make_family(2, degree, src, domain=n).signs_at(points).astype(np.float64)
        total += float(np.sum(op.apply(probe) ** 2))
    return float(np.sqrt(total / probes))

def default_power_steps(n : int) -> int:
    """Returns 2 ceil(log2 n), at least 4"""
    return max(4, 2 * (n - 1).bit_length())

def candidate_ladder(frobenius : float, n : int) -> list[float]:
    """Returns frobenius / 2^i for i = 0..ceil(log2 sqrt n)"""
    count = ((n - 1).bit_length() + 1) // 2 + 1
    return [frobenius / 2.0 ** i for i in range(count)]

def discretized_start(n : int, src : BitSource) -> np.ndarray:
    """Returns a Gaussian start rounded to ceil(log2 n) + 8 fractional bits, retrying if it rounds to zero"""
    scale = 2.0 ** ((n - 1).bit_length() + 8)
    for attempt in range(START_RETRIES + 1):
        start = np.round(src.numpy_generator().standard_normal(n) * scale) / scale
        if start.any():
            return start
        logging.warning("Power iteration start rounded to zero, retry %d", attempt + 1)
    raise ConvergenceError(f"power iteration start vector was zero after {START_RETRIES} retries")

def estimate_norm(
        op_a : LinearOperator,
        op_at : LinearOperator,
        src : BitSource,
        steps : int | None = None,
        probes : int = 4) -> NormEstimate:
    """Estimates ||A|| by power iteration on A^T A / Z~^2 + I/8 over a ladder of Z~

    Every candidate starts from the same discretized Gaussian vector; the estimate
    is the largest ||A z|| / ||z|| seen.
    """
    n = op_a.cols
    if op_at.shape != (op_a.cols, op_a.rows):
        raise InvalidArgumentError(f"{op_at.shape} is not the transpose shape of {op_a.shape}")
    steps = default_power_steps(n) if steps is None else steps
    if steps < 1:
        raise InvalidArgumentError(f"power steps must be positive, got {steps}")
    before = count_queries(op_a, op_at)
    probe_seed = src.seed
    frobenius = hutchinson_norm(op_a, probes, src)
    if frobenius == 0.0:
        raise InvalidArgumentError("every probe was mapped to zero, the operator looks like zero")
    start = discretized_start(n, src)
    start = start / np.linalg.norm(start)
    candidates = []
    for candidate in candidate_ladder(frobenius, n):
        z = start
        for _ in range(steps):
            mz = op_at.apply(op_a.apply(z)) / candidate ** 2 + POWER_SHIFT * z
            size = float(np.linalg.norm(mz))
            if size == 0.0:
                break
            z = mz / size
        candidates.append((candidate, float(np.linalg.norm(op_a.apply(z)))))
    z_best = max(value for _, value in candidates)
    if z_best == 0.0:
        raise ConvergenceError("power iteration returned a zero norm estimate")
    used = count_queries(op_a, op_at) - before
    logging.info("Norm estimate %.6g (Frobenius estimate %.6g) from %d matvecs", z_best, frobenius, used)
    return NormEstimate(z_best, frobenius, candidates, used, probe_seed, steps)
