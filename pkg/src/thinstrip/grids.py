"""Uniform grids: transversal (cell problems) and longitudinal (macro)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class YGrid:
    """Nodes across the strip.

    ``symmetric`` grids cover the lower half ``[-ell/2, 0]`` with the
    symmetry line at the last node; full grids span ``[-ell/2, ell/2]``
    with walls at both ends.
    """

    n_nodes: int
    ell_omega: float = 2.0
    symmetric: bool = True
    y: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_nodes < 16:
            raise GridError(f"need at least 16 transversal nodes, got {self.n_nodes}")
        half = 0.5 * self.ell_omega
        hi = 0.0 if self.symmetric else half
        y = np.linspace(-half, hi, self.n_nodes)
        object.__setattr__(self, "y", y)

    @property
    def h(self) -> float:
        return float(self.y[1] - self.y[0])

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights."""
        w = np.full(self.n_nodes, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def check_resolution(self, eps_bar: float):
        """Interface-resolution guard: at least 6 nodes per eps_bar."""
        if self.h > eps_bar / 6.0 + 1e-15:
            raise GridError(
                f"transversal spacing {self.h:.5g} too coarse for eps_bar="
                f"{eps_bar:g} (need h <= eps_bar/6)")


@dataclass(frozen=True)
class XGrid:
    """Finite-volume cells along the strip, spanning [0, 1].

    Cell centers sit at (k + 1/2) dx so that the faces, where the pressure
    lives, fall exactly on 0 and 1.
    """

    n_cells: int
    centers: np.ndarray = field(init=False, repr=False, compare=False)
    faces: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_cells < 1:
            raise GridError(f"need at least one cell, got {self.n_cells}")
        dx = 1.0 / self.n_cells
        object.__setattr__(self, "centers", (np.arange(self.n_cells) + 0.5) * dx)
        object.__setattr__(self, "faces", np.arange(self.n_cells + 1) * dx)

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells
