"""Experiment configuration"""

import logging
from dataclasses import dataclass, field

from ..common.common_errors import InvalidArgumentError
from ..common.common_settings import Settings
from ..perturb.perturb_settings import PerturbationSettings
from ..solver.solver_settings import SolveConfig

COMMANDS : tuple[str, ...] = (
    "gen-perturbation",
    "condition-experiment",
    "solve",
    "bit-audit",
    "pattern-check",
    "spectra",
    "kwise-audit",
)
OUTPUT_FORMATS : tuple[str, ...] = ("json", "csv")
PERTURBATION_KINDS : tuple[str, ...] = ("oblivious", "gaussian", "dense-only")
SVD_METHODS : tuple[str, ...] = ("jacobi", "lapack")
SOLVER_KEYS : tuple[str, ...] = (
    "delta", "max_matvecs", "matvec_constant", "norm_probe_count", "power_steps", "residual_cadence")

def parse_seed(value : str) -> int:
    """Parses a decimal or 0x-prefixed 64-bit seed"""
    try:
        seed = int(value, 0)
    except ValueError as error:
        raise InvalidArgumentError(f"invalid seed {value!r}") from error
    if not 0 <= seed < 1 << 64:
        raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed

def parse_seeds(value : str) -> list[int]:
    """Parses a seed list such as '1,2,10-14'"""
    seeds : list[int] = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            first, last = part.split("-", 1)
            start, stop = parse_seed(first), parse_seed(last)
            if stop < start:
                raise InvalidArgumentError(f"empty seed range {part!r}")
            seeds.extend(range(start, stop + 1))
        else:
            seeds.append(parse_seed(part))
    return seeds

@dataclass
class ExperimentConfig:
    """Validated settings of one CLI invocation"""

    command : str
    n_values : list[int] = field(default_factory=lambda: [64])
    seeds : list[int] = field(default_factory=lambda: [0])
    eps : float = 0.1
    delta : float = 0.1
    perturbation : PerturbationSettings = field(default_factory=PerturbationSettings)
    trials : int = 1
    out : str | None = None
    output_format : str = "json"
    oracle_cap : int | None = None
    workers : int = 1
    json_out : str | None = None
    matrix : str | None = None
    rhs : str | None = None
    input_path : str | None = None
    k : int = 2
    m : int = 3
    policy : str = "rounding"
    eps_mach : float = 0.0
    method : str = "jacobi"
    perturbation_kind : str = "oblivious"
    diagnose : bool = False
    max_matvecs : int | None = None
    solver : dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        """Checks every value the command will use, before any work starts"""
        if self.command not in COMMANDS:
            raise InvalidArgumentError(f"unknown command {self.command!r}")
        if not self.n_values or min(self.n_values) < 1:
            raise InvalidArgumentError(f"dimensions must be positive, got {self.n_values}")
        if not self.seeds:
            raise InvalidArgumentError("at least one seed is needed")
        if not 0.0 < self.eps < 1.0 or not 0.0 < self.delta < 1.0:
            raise InvalidArgumentError(f"eps and delta must lie in (0, 1), got {self.eps}, {self.delta}")
        if self.trials < 0 or self.workers < 1:
            raise InvalidArgumentError(f"need trials >= 0 and workers >= 1, got {self.trials}, {self.workers}")
        if self.output_format not in OUTPUT_FORMATS:
            raise InvalidArgumentError(f"output format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        if self.perturbation_kind not in PERTURBATION_KINDS:
            raise InvalidArgumentError(f"perturbation must be one of {PERTURBATION_KINDS}, got {self.perturbation_kind!r}")
        if self.method not in SVD_METHODS:
            raise InvalidArgumentError(f"SVD method must be one of {SVD_METHODS}, got {self.method!r}")
        if not 0.0 <= self.eps_mach < 1.0:
            raise InvalidArgumentError(f"eps_mach must lie in [0, 1), got {self.eps_mach}")
        if self.oracle_cap is not None:
            Settings.set_oracle_cap(self.oracle_cap)
        if self.command == "gen-perturbation" and self.out is None:
            raise InvalidArgumentError("gen-perturbation needs --out")
        if self.command == "solve" and (self.matrix is None or self.rhs is None):
            raise InvalidArgumentError("solve needs --matrix and --rhs")
        if self.command == "spectra" and self.input_path is None:
            raise InvalidArgumentError("spectra needs --in")
        if self.command == "bit-audit" and self.trials > 0 and len(set(self.n_values)) < 3:
            raise InvalidArgumentError(f"bit-audit needs at least three dimensions, got {self.n_values}")
        if self.command == "condition-experiment" and max(self.n_values) > Settings.oracle_cap:
            raise InvalidArgumentError(f"n={max(self.n_values)} exceeds the dense oracle cap {Settings.oracle_cap}")
        if self.command == "kwise-audit" and (self.k < 1 or self.m < 1):
            raise InvalidArgumentError(f"need k >= 1 and m >= 1, got k={self.k}, m={self.m}")
        self.solve_config()
        logging.debug("Validated %s configuration", self.command)
        return self

    @property
    def n(self) -> int:
        """Returns the first dimension"""
        return self.n_values[0]

    @property
    def seed(self) -> int:
        """Returns the first seed"""
        return self.seeds[0]

    def trial_seeds(self) -> list[int]:
        """Returns explicit seeds, or trials consecutive seeds from the first one"""
        if len(self.seeds) > 1:
            return list(self.seeds)
        return [self.seed + t for t in range(self.trials)]

    def solve_config(self) -> SolveConfig:
        """Returns the solver configuration, [solver] file values first"""
        values = dict(self.solver)
        values.pop("eps", None)
        unknown = set(values) - set(SOLVER_KEYS)
        if unknown:
            raise InvalidArgumentError(f"unknown solver settings: {sorted(unknown)}")
        values.setdefault("delta", self.delta)
        if self.max_matvecs is not None:
            values["max_matvecs"] = self.max_matvecs
        return SolveConfig(self.eps, perturbation=self.perturbation, **values)
