"""Pattern matrix calibration"""

import logging
from dataclasses import dataclass

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..rng.rng_bit_source import BitSource
from ..spectra.spectra_oracle import check_cap, svd_small
from .pattern_matrix import PatternMatrix

DEFAULT_SPARSITY : float = 0.01
DEFAULT_TARGET_FRACTION : float = 0.5
PERCENTILE : float = 1.0

def large_coordinate_count(
        pattern : PatternMatrix,
        eta : np.ndarray,
        x : np.ndarray,
        beta : float,
        transposed : bool = False) -> int:
    """Returns how many coordinates of V diag(eta) x (or V^T diag(eta) x) reach beta in magnitude

    Exactly-zero coordinates never count, so beta = 0 counts the nonzeros.
    """
    x = np.asarray(x, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if abs(np.linalg.norm(x) - 1.0) > 1e-9:
        raise InvalidArgumentError(f"x must be a unit vector, got norm {np.linalg.norm(x)}")
    if eta.shape != (pattern.n,) or not np.all(np.abs(eta) == 1.0):
        raise InvalidArgumentError("eta must be a sign vector of length n")
    product = pattern.apply_transpose(eta * x) if transposed else pattern.apply(eta * x)
    magnitude = np.abs(product)
    return int(np.count_nonzero((magnitude >= beta) & (magnitude > 0.0)))

@dataclass
class CalibrationResult:
    """Empirical pattern constants"""

    rho_hat : float | None
    beta_hat : float
    gamma_hat : float
    trials : int
    alpha : float

    def to_dict(self) -> dict:
        """Returns a JSON-friendly dictionary"""
        return {
            "rho_hat": self.rho_hat,
            "beta_hat": self.beta_hat,
            "gamma_hat": self.gamma_hat,
            "trials": self.trials,
            "alpha": self.alpha,
        }

def sparse_unit_vector(n : int, alpha : float, src : BitSource, rng : np.random.Generator) -> np.ndarray:
    """Returns a unit vector supported on max(1, floor(alpha n)) uniformly chosen coordinates"""
    support = np.array(src.sample_k_subset(n, max(1, int(alpha * n)))) - 1
    x = np.zeros(n)
    values = rng.standard_normal(support.size)
    while not values.any():
        values = rng.standard_normal(support.size)
    x[support] = values / np.linalg.norm(values)
    return x

def calibrate(
        pattern : PatternMatrix,
        trials : int,
        alpha : float,
        src : BitSource,
        include_rho : bool = True,
        target_fraction : float = DEFAULT_TARGET_FRACTION) -> CalibrationResult:
    """Estimates rho, beta and gamma for a pattern matrix

    beta_hat is the 1st percentile, over sampled sparse unit x, sign diagonals and
    both orientations, of the magnitude reached by a target_fraction of coordinates.
    gamma_hat is the 1st percentile of the fraction of coordinates reaching beta_hat.
    """
    if trials < 1:
        raise InvalidArgumentError(f"trials must be positive, got {trials}")
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"sparsity must lie in (0, 1), got {alpha}")
    if not 0.0 < target_fraction <= 1.0:
        raise InvalidArgumentError(f"target fraction must lie in (0, 1], got {target_fraction}")
    n = pattern.n
    rho_hat = None
    if include_rho:
        check_cap(n)
        rho_hat = svd_small(pattern.to_dense()).s_1 / np.sqrt(n)
    rng = src.numpy_generator()
    rank = max(1, int(np.ceil(target_fraction * n)))
    magnitudes = []
    for _ in range(trials):
        x = sparse_unit_vector(n, alpha, src, rng)
        eta = src.next_signs(n).astype(np.float64)
        for product in (pattern.apply(eta * x), pattern.apply_transpose(eta * x)):
            magnitudes.append(np.sort(np.abs(product))[::-1])
    magnitudes = np.array(magnitudes)
    beta_hat = float(np.percentile(magnitudes[:, rank - 1], PERCENTILE))
    reached = ((magnitudes >= beta_hat) & (magnitudes > 0.0)).mean(axis=1)
    gamma_hat = float(np.percentile(reached, PERCENTILE))
    logging.info("Calibrated n=%d: rho_hat=%s beta_hat=%.4g gamma_hat=%.4g", n, rho_hat, beta_hat, gamma_hat)
    return CalibrationResult(rho_hat, beta_hat, gamma_hat, trials, alpha)
