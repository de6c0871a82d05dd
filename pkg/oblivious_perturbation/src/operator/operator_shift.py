"""Away-from-zero rank-one shift"""

import math
from dataclasses import dataclass

import numpy as np

from ..common.common_errors import InvalidArgumentError
from ..rng.rng_bit_source import BitSource

@dataclass(frozen=True)
class GammaGrid:
    """Symmetric grid on +-[D/2, D] with `points` values per side"""

    radius : float
    points : int

    def value(self, index : int) -> float:
        """Returns grid value number index in [0, 2 * points), negative side first"""
        if not 0 <= index < 2 * self.points:
            raise InvalidArgumentError(f"grid index {index} outside [0, {2 * self.points})")
        side, offset = divmod(index, self.points)
        step = 0.0 if self.points == 1 else (self.radius / 2.0) / (self.points - 1)
        magnitude = self.radius / 2.0 + offset * step
        return magnitude if side else -magnitude

    def values(self) -> np.ndarray:
        """Returns the whole grid, negative side first"""
        positive = np.linspace(self.radius / 2.0, self.radius, self.points)
        return np.concatenate((-positive, positive))

def gamma_grid(n : int, delta : float, l : float) -> GammaGrid:
    """Returns the grid with D = 4 sqrt(n / (delta L)) and ceil(C n^2) points per side, C = 1/(2 delta)"""
    if n < 1 or not 0.0 < delta < 1.0:
        raise InvalidArgumentError(f"need n >= 1 and delta in (0, 1), got n={n}, delta={delta}")
    if l < 4.0 * n ** 3 / delta * (1.0 - 1e-12):
        raise InvalidArgumentError(f"L={l} is below 4 n^3 / delta = {4.0 * n ** 3 / delta}")
    radius = 4.0 * math.sqrt(n / (delta * l))
    return GammaGrid(radius, math.ceil(n * n / (2.0 * delta) - 1e-9))

def draw_gamma(n : int, delta : float, l : float, src : BitSource) -> float:
    """Draws gamma uniformly from the symmetric grid"""
    grid = gamma_grid(n, delta, l)
    return grid.value(src.uniform_int(2 * grid.points))

@dataclass
class EntryFloorReport:
    """Smallest entry magnitude against ||A|| / L"""

    min_entry : float
    norm : float
    l : float
    holds : bool

def entry_floor_report(matrix : np.ndarray, l : float, norm : float | None = None) -> EntryFloorReport:
    """Checks min |a_ij| >= ||A|| / L, the precondition for simulating a matvec by fl-arithmetic"""
    matrix = np.asarray(matrix, dtype=np.float64)
    if l <= 0.0:
        raise InvalidArgumentError(f"L must be positive, got {l}")
    norm = float(np.linalg.norm(matrix, 2)) if norm is None else norm
    smallest = float(np.abs(matrix).min())
    return EntryFloorReport(smallest, norm, l, smallest >= norm / l)
