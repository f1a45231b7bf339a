from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import InvalidArgumentError


@dataclass
class Grid:
    spacing: str
    points: List[float]

    @property
    def n_points(self) -> int:
        return len(self.points)


def linear(x_min: float, x_max: float, n_points: int) -> Grid:
    return Grid("linear", [float(x) for x in np.linspace(x_min, x_max, n_points)])


def geometric(x_min: float, x_max: float, n_points: int) -> Grid:
    if x_min <= 0:
        raise InvalidArgumentError(f"geometric grid needs x_min > 0, got {x_min}")
    return Grid("geometric", [float(x) for x in np.geomspace(x_min, x_max, n_points)])


grids = {"linear": linear, "geometric": geometric}


def make_grid(x_min: float, x_max: float, n_points: int, spacing: str = "linear") -> Grid:
    """Evaluation points from `grids[spacing]`; a single point sits at x_min."""
    if spacing not in grids:
        raise InvalidArgumentError(f"unknown grid spacing {spacing!r}, expected one of {sorted(grids)}")
    if n_points < 1:
        raise InvalidArgumentError(f"n_points must be >= 1, got {n_points}")
    if not x_min <= x_max:
        raise InvalidArgumentError(f"need x_min <= x_max, got [{x_min}, {x_max}]")
    if n_points == 1:
        return Grid(spacing, [float(x_min)])
    return grids[spacing](x_min, x_max, n_points)
