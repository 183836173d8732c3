"""Nondimensional model constants shared by all solvers."""
from __future__ import annotations

from dataclasses import dataclass, field


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Physical and scaling constants of the thin-strip model.

    ``sigma`` are the phase surface-tension weights, ``gamma`` the phase
    viscosities, ``rho3`` and ``d0`` control the friction that immobilises
    the solid phase, and ``eps_bar`` is the diffuse-interface width.
    ``delta`` regularises the degenerate limits (mobile solid traces,
    potential barriers); it defaults to ``eps_bar``.
    """

    sigma: tuple[float, float, float] = (1.0, 1.0, 1.0)
    gamma: tuple[float, float, float] = (1.0, 1.0, 1.0)
    rho3: float = 1.0
    d0: float = 1.0e4
    eps_bar: float = 0.03
    delta: float = field(default=-1.0)  # sentinel, resolved to eps_bar
    m_bar: float = 1.0
    da_bar: float = 1.0
    pec_bar: float = 1.0
    alpha: float = 0.0
    c_eq: float = 0.5
    ell_omega: float = 2.0

    def __post_init__(self):
        if self.delta == -1.0:
            object.__setattr__(self, "delta", self.eps_bar)
        if any(s <= 0 for s in self.sigma):
            raise InvalidParams(f"sigma must be positive, got {self.sigma}")
        if any(g <= 0 for g in self.gamma):
            raise InvalidParams(f"gamma must be positive, got {self.gamma}")
        if self.rho3 <= 0:
            raise InvalidParams(f"rho3 must be positive, got {self.rho3}")
        if self.d0 < 0:
            raise InvalidParams(f"d0 must be nonnegative, got {self.d0}")
        if not 0.0 < self.eps_bar < 1.0:
            raise InvalidParams(f"eps_bar must lie in (0, 1), got {self.eps_bar}")
        if not 0.0 <= self.delta < 1.0:
            raise InvalidParams(f"delta must lie in [0, 1), got {self.delta}")
        if self.m_bar <= 0 or self.pec_bar <= 0:
            raise InvalidParams("m_bar and pec_bar must be positive")
        if self.da_bar < 0:
            raise InvalidParams(f"da_bar must be nonnegative, got {self.da_bar}")
        if self.alpha < 0:
            raise InvalidParams(f"alpha must be nonnegative, got {self.alpha}")
        if self.ell_omega <= 0:
            raise InvalidParams(f"ell_omega must be positive, got {self.ell_omega}")

    @property
    def alpha_tilde(self) -> float:
        """Regularised kinetic coefficient of the chemical-potential feedback."""
        return self.alpha + self.delta

    def linear_rate(self, c):
        """Default precipitation rate, linear in the oversaturation."""
        return c - self.c_eq
