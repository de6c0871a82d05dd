"""Perturbation settings"""

import math

from ..common.common_errors import InvalidArgumentError

DEFAULT_K : int = 8

def theory_rule_parameters(delta : float, alpha : float, constant : float) -> tuple[int, int]:
    """Returns K = ceil(S / (delta^2 alpha^3)) and L = ceil(2 e K)"""
    if not 0.0 < delta < 1.0 or not 0.0 < alpha < 1.0 or constant <= 0.0:
        raise InvalidArgumentError("theory rule needs delta, alpha in (0, 1) and a positive constant")
    k = max(1, math.ceil(constant / (delta ** 2 * alpha ** 3)))
    return k, math.ceil(2.0 * math.e * k)

class PerturbationSettings:
    """Pattern constants and sparse-part sizes for one perturbation build"""

    def __init__(self,
            alpha : float = 0.01,
            beta : float = 0.1,
            gamma : float = 0.05,
            rho : float = 3.0,
            k : int | None = None,
            l : int | None = None,
            theory_rule : bool = False,
            theory_constant : float = 1.0) -> None:
        if not 0.0 < alpha < 1.0:
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
        if beta <= 0.0 or not 0.0 < gamma <= 1.0 or rho <= 0.0:
            raise InvalidArgumentError(f"need beta > 0, gamma in (0, 1], rho > 0, got {beta}, {gamma}, {rho}")
        if theory_constant <= 0.0:
            raise InvalidArgumentError(f"theory constant must be positive, got {theory_constant}")
        self.__alpha : float = float(alpha)
        self.__beta : float = float(beta)
        self.__gamma : float = float(gamma)
        self.__rho : float = float(rho)
        self.__k : int | None = k
        self.__l : int | None = l
        self.__theory_rule : bool = theory_rule
        self.__theory_constant : float = float(theory_constant)

    @property
    def alpha(self) -> float:
        """Returns sparsity constant"""
        return self.__alpha

    @property
    def beta(self) -> float:
        """Returns coordinate magnitude constant"""
        return self.__beta

    @property
    def gamma(self) -> float:
        """Returns coordinate fraction constant"""
        return self.__gamma

    @property
    def rho(self) -> float:
        """Returns norm constant, the dense part is scaled by 1/(rho sqrt n)"""
        return self.__rho

    @property
    def theory_rule(self) -> bool:
        """Returns True if K and L come from delta and alpha"""
        return self.__theory_rule

    @property
    def theory_constant(self) -> float:
        """Returns the constant S of the theory rule"""
        return self.__theory_constant

    def sparse_sizes(self, delta : float) -> tuple[int, int]:
        """Returns (K, L) for a failure budget delta"""
        if self.__theory_rule and self.__k is None and self.__l is None:
            return theory_rule_parameters(delta, self.__alpha, self.__theory_constant)
        k = DEFAULT_K if self.__k is None else self.__k
        l = math.ceil(2.0 * math.e * k) if self.__l is None else self.__l
        return k, l

    def replace(self, **changes) -> "PerturbationSettings":
        """Returns a copy with some fields changed"""
        values = self.to_dict()
        values.update(changes)
        return PerturbationSettings(**values)

    def to_dict(self) -> dict:
        """Returns a JSON-friendly dictionary"""
        return {
            "alpha": self.__alpha,
            "beta": self.__beta,
            "gamma": self.__gamma,
            "rho": self.__rho,
            "k": self.__k,
            "l": self.__l,
            "theory_rule": self.__theory_rule,
            "theory_constant": self.__theory_constant,
        }

    @classmethod
    def from_dict(cls, values : dict) -> "PerturbationSettings":
        """Builds settings from a dictionary such as a [perturbation] TOML table"""
        known = ("alpha", "beta", "gamma", "rho", "k", "l", "theory_rule", "theory_constant")
        unknown = set(values) - set(known)
        if unknown:
            raise InvalidArgumentError(f"unknown perturbation settings: {sorted(unknown)}")
        return cls(**values)
