"""Combined oblivious perturbation"""

import logging

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..rng.rng_bit_source import BitSource
from ..pattern.pattern_matrix import build_pattern
from ..operator.operator_linear import LinearOperator
from .perturb_settings import PerturbationSettings
from .perturb_dense import DensePerturbation, build_r1
from .perturb_sparse import SparsePerturbation, build_r2

class ObliviousPerturbation:
    """R = (R1 + R2) / 2 with the build parameters and per-component bit counts"""

    def __init__(self,
            r1 : DensePerturbation,
            r2 : SparsePerturbation,
            eps : float,
            delta : float,
            settings : PerturbationSettings,
            bit_report : dict[str, int]) -> None:
        if r1.n != r2.n:
            raise InvalidArgumentError(f"dense part has n={r1.n}, sparse part has n={r2.n}")
        self.__r1 : DensePerturbation = r1
        self.__r2 : SparsePerturbation = r2
        self.__eps : float = float(eps)
        self.__delta : float = float(delta)
        self.__settings : PerturbationSettings = settings
        self.__bit_report : dict[str, int] = dict(bit_report)

    @property
    def n(self) -> int:
        """Returns dimension"""
        return self.__r1.n

    @property
    def r1(self) -> DensePerturbation:
        """Returns dense pattern part"""
        return self.__r1

    @property
    def r2(self) -> SparsePerturbation:
        """Returns sparse trimmed part"""
        return self.__r2

    @property
    def eps(self) -> float:
        """Returns perturbation size the build was requested for"""
        return self.__eps

    @property
    def delta(self) -> float:
        """Returns failure budget"""
        return self.__delta

    @property
    def settings(self) -> PerturbationSettings:
        """Returns build settings"""
        return self.__settings

    @property
    def bit_report(self) -> dict[str, int]:
        """Returns bits per component and their total"""
        report = dict(self.__bit_report)
        report["total"] = sum(self.__bit_report.values())
        return report

    @property
    def bits_total(self) -> int:
        """Returns total bits consumed by the build"""
        return sum(self.__bit_report.values())

    def apply(self, x : np.ndarray) -> np.ndarray:
        """Returns R x"""
        return 0.5 * (self.__r1.apply(x) + self.__r2.apply(x))

    def apply_transpose(self, x : np.ndarray) -> np.ndarray:
        """Returns R^T x"""
        return 0.5 * (self.__r1.apply_transpose(x) + self.__r2.apply_transpose(x))

    def to_dense(self) -> np.ndarray:
        """Returns R as a dense matrix"""
        return 0.5 * (self.__r1.to_dense() + self.__r2.to_dense())

    def as_operator(self) -> LinearOperator:
        """Returns R as an exact operator with norm hint 1"""
        return LinearOperator(self.n, self.n, self.apply, self.apply_transpose, norm_hint=1.0, name="oblivious-perturbation")

    def summary(self) -> dict:
        """Returns the JSON summary printed by gen-perturbation"""
        report = self.bit_report
        return {
            "n": self.n,
            "K": self.__r2.k,
            "L": self.__r2.l,
            "bits_total": report.pop("total"),
            "bits_by_component": report,
            "heavy_rows": int(np.count_nonzero(self.__r2.heavy_mask)),
        }

def build_perturbation(
        n : int,
        eps : float,
        delta : float,
        settings : PerturbationSettings | None,
        src : BitSource) -> ObliviousPerturbation:
    """Builds R from src, pattern first, then d1 and d2, then the sparse part"""
    if not 0.0 < eps < 1.0:
        raise InvalidArgumentError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")
    settings = PerturbationSettings() if settings is None else settings
    k, l = settings.sparse_sizes(delta)
    if k >= l:
        raise InvalidArgumentError(f"need K < L, got K={k}, L={l}")
    if k > n:
        logging.warning("Subset size K=%d exceeds n=%d, using K=n", k, n)
        k = n
    pattern = build_pattern(n, src)
    before = src.bits_consumed
    r1 = build_r1(n, pattern, src, settings.rho)
    dense_bits = src.bits_consumed - before
    r2 = build_r2(n, k, l, src)
    bit_report = pattern.bit_report
    bit_report["dense_signs"] = dense_bits
    bit_report.update(r2.bit_report)
    perturbation = ObliviousPerturbation(r1, r2, eps, delta, settings, bit_report)
    logging.info("Built oblivious perturbation n=%d K=%d L=%d bits=%d", n, k, l, perturbation.bits_total)
    return perturbation

def gaussian_perturbation(n : int, src : BitSource) -> np.ndarray:
    """Returns the dense comparison baseline G / (2 sqrt n) with standard normal G, not bit-audited"""
    if n < 1:
        raise InvalidArgumentError(f"dimension must be positive, got {n}")
    return src.numpy_generator().standard_normal((n, n)) / (2.0 * np.sqrt(n))
