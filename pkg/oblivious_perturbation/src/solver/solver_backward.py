"""Backward-stable solve through a perturbed, shifted instance"""

import math
import logging
from dataclasses import dataclass, field

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..rng.rng_bit_source import BitSource
from ..operator.operator_linear import LinearOperator, count_queries
from ..operator.operator_algebra import normal_equations_op, rank_one_shifted, scaled_op, sum_op
from ..operator.operator_shift import draw_gamma
from ..perturb.perturb_oblivious import ObliviousPerturbation, build_perturbation
from .solver_cg import cg_normal_equations
from .solver_norm import estimate_norm, hutchinson_norm
from .solver_settings import SolveConfig

CERTIFY_FACTOR : float = 4.0
SHIFT_NOISE_SEED : int = 0x5EED

@dataclass
class SolveReport:
    """Outcome of solve_backward with every counter it used"""

    x : np.ndarray
    residual_norm : float
    backward_ratio : float
    matvecs_used : int
    iterations : int
    succeeded : bool
    eps : float
    norm_estimate : float = 0.0
    frobenius_estimate : float = 0.0
    perturbed_residual : float = math.inf
    gamma : float = 0.0
    shift : float = 0.0
    shifted_norm_estimate : float = 0.0
    shift_threshold : float = 0.0
    cap : int = 0
    cap_hit : bool = False
    breakdown : bool = False
    bits_used : int = 0
    chain_holds : bool = True
    iteration_bounds : dict | None = None
    perturbation : ObliviousPerturbation | None = field(default=None, repr=False)

    def perturbed_dense(self, matrix : np.ndarray) -> np.ndarray:
        """Returns the shifted instance A + eps Z R + shift 1 1^T the solve worked on"""
        if self.perturbation is None:
            raise InvalidArgumentError("report carries no perturbation")
        matrix = np.asarray(matrix, dtype=np.float64)
        return matrix + self.eps * self.norm_estimate * self.perturbation.to_dense() + self.shift

    def to_dict(self, include_x : bool = True) -> dict:
        """Returns a JSON-friendly dictionary"""
        values = {
            "residual_norm": self.residual_norm,
            "backward_ratio": self.backward_ratio,
            "matvecs_used": self.matvecs_used,
            "iterations": self.iterations,
            "succeeded": self.succeeded,
            "eps": self.eps,
            "norm_estimate": self.norm_estimate,
            "frobenius_estimate": self.frobenius_estimate,
            "perturbed_residual": self.perturbed_residual,
            "gamma": self.gamma,
            "shift": self.shift,
            "shifted_norm_estimate": self.shifted_norm_estimate,
            "shift_threshold": self.shift_threshold,
            "matvec_cap": self.cap,
            "cap_hit": self.cap_hit,
            "breakdown": self.breakdown,
            "bits_used": self.bits_used,
            "chain_holds": self.chain_holds,
            "iteration_bounds": self.iteration_bounds,
        }
        if include_x:
            values["x"] = self.x.tolist()
        return values

def backward_error(op_a : LinearOperator, x : np.ndarray, b : np.ndarray, norm_a : float) -> float:
    """Returns ||Ax - b|| / (norm_a ||x||), +inf for x = 0"""
    if norm_a <= 0.0:
        raise InvalidArgumentError(f"norm of A must be positive, got {norm_a}")
    x = np.asarray(x, dtype=np.float64)
    size = float(np.linalg.norm(x))
    if size == 0.0:
        logging.warning("Backward error of the zero vector is undefined, reporting inf")
        return math.inf
    return float(np.linalg.norm(op_a.apply(x) - b)) / (norm_a * size)

def higham_correction(matrix : np.ndarray, x : np.ndarray, b : np.ndarray) -> np.ndarray:
    """Returns A + (b - Ax) x^T / ||x||^2, a matrix that maps x exactly to b"""
    matrix = np.asarray(matrix, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    size = float(x @ x)
    if size == 0.0:
        raise InvalidArgumentError("no correction maps the zero vector to a nonzero b")
    return matrix + np.outer(np.asarray(b, dtype=np.float64) - matrix @ x, x) / size

def iteration_bounds(kappa : float, eps : float, kappa_normal : float | None = None) -> dict:
    """Returns kappa log(1/eps) and sqrt(kappa(M)) log(1/eps) for M = A^T A"""
    kappa_normal = kappa ** 2 if kappa_normal is None else kappa_normal
    factor = math.log(1.0 / eps)
    return {
        "kappa": kappa,
        "kappa_normal": kappa_normal,
        "kappa_log": kappa * factor,
        "sqrt_kappa_normal_log": math.sqrt(kappa_normal) * factor,
    }

def shift_threshold(n : int, delta : float, eps : float, norm_estimate : float, shifted_norm : float) -> float:
    """Returns L for the gamma grid: max(4 n^3 / delta, (16 n Z^ / (eps Z))^2)"""
    return max(4.0 * n ** 3 / delta, (16.0 * n * shifted_norm / (eps * norm_estimate)) ** 2)

def cg_iteration_budget(cap : int, used : int, cadence : int) -> int:
    """Returns CG iterations that fit the remaining queries

    Each iteration costs two queries, each residual check one, and the right-hand
    side, an early-stop check and the final certification one each.
    """
    blocks = (cap - used - 3) // (2 * cadence + 1)
    return max(0, blocks * cadence)

def solve_backward(
        op_a : LinearOperator,
        op_at : LinearOperator,
        b : np.ndarray,
        cfg : SolveConfig,
        src : BitSource) -> SolveReport:
    """Computes x with ||Ax - b|| <= 4 eps ||A|| ||x|| from matvec queries only

    The system is replaced by A + eps Z R + gamma Z^ sqrt(delta/n) 1 1^T, with Z
    the power-iteration norm estimate of A, R the oblivious perturbation and Z^
    the Hutchinson estimate of A + eps Z R, and CG runs on its normal equations. The result is certified against A itself.
    """
    n = op_a.cols
    if op_a.rows != n or op_at.shape != (n, n):
        raise InvalidArgumentError(f"need square A and A^T operators, got {op_a.shape} and {op_at.shape}")
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (n,):
        raise InvalidArgumentError(f"right-hand side has shape {b.shape}, expected ({n},)")
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        raise InvalidArgumentError("right-hand side must be nonzero")
    eps = cfg.eps
    cap = cfg.matvec_cap(n)
    queries_before = count_queries(op_a, op_at)
    bits_before = src.bits_consumed

    def used() -> int:
        return count_queries(op_a, op_at) - queries_before

    norm = estimate_norm(op_a, op_at, src, cfg.power_steps, cfg.norm_probe_count)
    z = norm.z
    perturbation = build_perturbation(n, eps, cfg.delta, cfg.perturbation, src)
    r_op = perturbation.as_operator()
    hat_a = sum_op(op_a, scaled_op(r_op, eps * z), seed=SHIFT_NOISE_SEED)
    hat_at = sum_op(op_at, scaled_op(r_op.transpose(), eps * z), seed=SHIFT_NOISE_SEED + 1)
    shifted_norm = hutchinson_norm(hat_a, cfg.norm_probe_count, src)
    l_shift = shift_threshold(n, cfg.delta, eps, z, shifted_norm)
    gamma = draw_gamma(n, cfg.delta, l_shift, src)
    shift = gamma * shifted_norm * math.sqrt(cfg.delta / n)
    tilde_a = rank_one_shifted(hat_a, shift)
    tilde_at = rank_one_shifted(hat_at, shift)
    bits_used = src.bits_consumed - bits_before
    logging.info("Solve setup n=%d: Z=%.6g Z^=%.6g L=%.3e gamma=%.6g shift=%.3e, %d bits, %d matvecs so far",
        n, z, shifted_norm, l_shift, gamma, shift, bits_used, used())

    cadence = cfg.residual_cadence
    max_iter = cg_iteration_budget(cap, used(), cadence)
    if max_iter == 0:
        logging.warning("Matvec cap %d leaves no room for CG after %d setup queries", cap, used())
        x = np.zeros(n)
        return SolveReport(
            x, b_norm, math.inf, used(), 0, False, eps, z, norm.frobenius_estimate, b_norm, gamma, shift,
            shifted_norm, l_shift, cap, True, False, bits_used, True, perturbation=perturbation)

    tol = cfg.cg_tolerance(b_norm)
    v = tilde_at.apply(b)
    op_m = normal_equations_op(tilde_a, tilde_at)

    def true_residual(x : np.ndarray) -> float:
        return float(np.linalg.norm(tilde_a.apply(x) - b))

    result = cg_normal_equations(op_m, v, tol, max_iter, residual=true_residual, cadence=cadence)
    x = result.x
    perturbed_residual = result.true_residual if result.true_residual is not None else true_residual(x)
    residual_norm = float(np.linalg.norm(op_a.apply(x) - b))
    x_norm = float(np.linalg.norm(x))
    ratio = math.inf if x_norm == 0.0 else residual_norm / (z * x_norm)
    if x_norm == 0.0:
        logging.warning("CG returned the zero vector, backward error is undefined")
    succeeded = ratio <= CERTIFY_FACTOR * eps
    chain_holds = perturbed_residual > tol or succeeded
    if not chain_holds:
        logging.warning("Perturbed residual %.3e met the target but the certified ratio is %.3e", perturbed_residual, ratio)
    cap_hit = not result.converged and not result.breakdown and result.iterations >= max_iter
    if cap_hit:
        logging.warning("Matvec cap %d reached after %d CG iterations", cap, result.iterations)
    report = SolveReport(
        x, residual_norm, ratio, used(), result.iterations, succeeded, eps, z, norm.frobenius_estimate,
        perturbed_residual, gamma, shift, shifted_norm, l_shift, cap, cap_hit, result.breakdown, bits_used, chain_holds,
        perturbation=perturbation)
    logging.info("Solve finished: ratio=%.3e succeeded=%s iterations=%d matvecs=%d",
        ratio, succeeded, result.iterations, report.matvecs_used)
    return report
