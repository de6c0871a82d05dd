"""Solver settings"""

import math

from ..common.common_errors import InvalidArgumentError
from ..common.common_settings import Settings
from ..perturb.perturb_settings import PerturbationSettings

DEFAULT_MATVEC_CONSTANT : float = 200.0
DEFAULT_NORM_PROBES : int = 4

class SolveConfig:
    """Targets and budgets of one backward-error solve"""

    def __init__(self,
            eps : float,
            delta : float = 0.1,
            max_matvecs : int | None = None,
            matvec_constant : float = DEFAULT_MATVEC_CONSTANT,
            norm_probe_count : int = DEFAULT_NORM_PROBES,
            power_steps : int | None = None,
            residual_cadence : int | None = None,
            perturbation : PerturbationSettings | None = None) -> None:
        if not 0.0 < eps < 1.0:
            raise InvalidArgumentError(f"eps must lie in (0, 1), got {eps}")
        if not 0.0 < delta < 1.0:
            raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")
        if max_matvecs is not None and max_matvecs < 1:
            raise InvalidArgumentError(f"matvec cap must be positive, got {max_matvecs}")
        if matvec_constant <= 0.0 or norm_probe_count < 1:
            raise InvalidArgumentError("matvec constant and probe count must be positive")
        if power_steps is not None and power_steps < 1:
            raise InvalidArgumentError(f"power steps must be positive, got {power_steps}")
        if residual_cadence is not None and residual_cadence < 1:
            raise InvalidArgumentError(f"residual cadence must be positive, got {residual_cadence}")
        self.__eps : float = float(eps)
        self.__delta : float = float(delta)
        self.__max_matvecs : int | None = max_matvecs
        self.__matvec_constant : float = float(matvec_constant)
        self.__norm_probe_count : int = norm_probe_count
        self.__power_steps : int | None = power_steps
        self.__residual_cadence : int | None = residual_cadence
        self.__perturbation : PerturbationSettings = perturbation or PerturbationSettings()

    @property
    def eps(self) -> float:
        """Returns target backward error"""
        return self.__eps

    @property
    def delta(self) -> float:
        """Returns failure budget"""
        return self.__delta

    @property
    def norm_probe_count(self) -> int:
        """Returns number of Hutchinson probes"""
        return self.__norm_probe_count

    @property
    def power_steps(self) -> int | None:
        """Returns power steps per candidate, None for the default"""
        return self.__power_steps

    @property
    def residual_cadence(self) -> int:
        """Returns iterations between true-residual checks"""
        return Settings.residual_cadence if self.__residual_cadence is None else self.__residual_cadence

    @property
    def perturbation(self) -> PerturbationSettings:
        """Returns perturbation settings"""
        return self.__perturbation

    def cg_tolerance(self, rhs_norm : float) -> float:
        """Returns the residual target eps * ||b||"""
        return self.__eps * rhs_norm

    def matvec_cap(self, n : int) -> int:
        """Returns max_matvecs, defaulting to c n log(1/eps) / eps^3"""
        if self.__max_matvecs is not None:
            return self.__max_matvecs
        return math.ceil(self.__matvec_constant * n * math.log(1.0 / self.__eps) / self.__eps ** 3)

    def to_dict(self) -> dict:
        """Returns a JSON-friendly dictionary"""
        return {
            "eps": self.__eps,
            "delta": self.__delta,
            "max_matvecs": self.__max_matvecs,
            "matvec_constant": self.__matvec_constant,
            "norm_probe_count": self.__norm_probe_count,
            "power_steps": self.__power_steps,
            "residual_cadence": self.residual_cadence,
            "perturbation": self.__perturbation.to_dict(),
        }
