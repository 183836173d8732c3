"""Transversal flow profiles and permeabilities.

For a frozen phase configuration the horizontal velocity factorises as
``v1(y) = -w(y) dp/dx`` where w solves a damped Poisson problem across the
strip.  This module provides the finite-element solve of that problem for
diffuse phase fields, an exact piecewise evaluator for layered sharp
configurations, and the matching closed-form permeabilities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .grids import YGrid
from .params import ModelParams
from .potentials import mixtures


def solve_w_phasefield(phi, grid: YGrid, params: ModelParams) -> np.ndarray:
    """Velocity shape w from ``rho3 d(phi_f) w - (gamma_t w')' = phi_f``.

    Linear elements with harmonically averaged viscosity per element and a
    lumped friction/load; w = 0 at walls, natural condition at the symmetry
    line.  The lumped form keeps the matrix an M-matrix, so w >= 0 whenever
    the fluid fraction is nonnegative.
    """
    phi = np.asarray(phi, dtype=float)
    n = grid.n_nodes
    if phi.shape != (3, n):
        raise ValueError(f"phi must have shape (3, {n})")
    phi_f, _, _, gamma_t, d_val = mixtures(phi, params)
    h = grid.h
    ge = 2.0 / (1.0 / gamma_t[:-1] + 1.0 / gamma_t[1:])  # harmonic element viscosity
    m = grid.weights

    diag = params.rho3 * d_val * m
    diag[:-1] += ge / h
    diag[1:] += ge / h
    lower = -ge / h
    upper = -ge / h
    rhs = phi_f * m

    dirichlet = [0] if grid.symmetric else [0, n - 1]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    for i in dirichlet:
        # replace the row by w_i = 0 and decouple the column
        ab[1, i] = 1.0
        rhs[i] = 0.0
        if i + 1 < n:
            ab[0, i + 1] = 0.0  # A[i, i+1]
            ab[2, i] = 0.0      # A[i+1, i]
        if i - 1 >= 0:
            ab[2, i - 1] = 0.0  # A[i, i-1]
            ab[0, i] = 0.0      # A[i-1, i]
    return solve_banded((1, 1), ab, rhs)


def slip_length(params: ModelParams) -> float:
    """Effective Navier slip length gamma1 / sqrt(rho3 d0 gamma3)."""
    if params.d0 <= 0:
        raise ValueError("slip length undefined for d0 = 0")
    return params.gamma[0] / np.sqrt(params.rho3 * params.d0 * params.gamma[2])


@dataclass(frozen=True)
class SharpFlowProfile:
    """Exact layered profile: fluid 2 in |y| < d2, fluid 1 in d2 < |y| < d1+d2,
    solid outside.  Parabolic in the fluids, exponential decay (rate
    sqrt(rho3 d0 / gamma3)) in the solid, glued by continuity of w and of the
    stress gamma w'.
    """

    d1: float
    d2: float
    params: ModelParams

    def __post_init__(self):
        half = 0.5 * self.params.ell_omega
        if self.d1 <= 0 or self.d2 < 0:
            raise ValueError("layer widths must be positive")
        if self.d1 + self.d2 >= half:
            raise ValueError("fluid layers exceed the strip half-width")

    def _pieces(self):
        p = self.params
        g1, g2, g3 = p.gamma
        l1 = self.d1 + self.d2
        half = 0.5 * p.ell_omega
        kappa = np.sqrt(p.rho3 * p.d0 / g3)
        m_solid = half - l1
        tanh_t = np.tanh(kappa * m_solid)
        w_l1 = l1 * tanh_t / (g3 * kappa)  # slip velocity at the solid edge
        return g1, g2, l1, half, kappa, m_solid, w_l1

    def __call__(self, y):
        y = np.abs(np.asarray(y, dtype=float))
        g1, g2, l1, half, kappa, m_solid, w_l1 = self._pieces()
        d2 = self.d2
        out = np.zeros(y.shape)
        fl2 = y <= d2
        fl1 = (y > d2) & (y <= l1)
        sol = y > l1
        out = np.where(fl2, (l1**2 - d2**2) / (2 * g1) + (d2**2 - y**2) / (2 * g2) + w_l1, out)
        out = np.where(fl1, (l1**2 - y**2) / (2 * g1) + w_l1, out)
        if np.any(sol):
            g3 = self.params.gamma[2]
            ys = np.minimum(y, half)
            out = np.where(sol, l1 * np.sinh(kappa * (half - ys))
                           / (g3 * kappa * np.cosh(kappa * m_solid)), out)
        return out if out.ndim else float(out)

    def stress(self, y):
        """gamma(y) w'(y); equals -y in the fluid layers."""
        y = np.asarray(y, dtype=float)
        s = np.sign(y)
        ya = np.abs(y)
        g1, g2, l1, half, kappa, m_solid, w_l1 = self._pieces()
        out = np.where(ya <= l1, -ya, 0.0)
        sol = ya > l1
        if np.any(sol):
            ys = np.minimum(ya, half)
            out = np.where(sol, -l1 * np.cosh(kappa * (half - ys)) / np.cosh(kappa * m_solid), out)
        return s * out if out.ndim else float(s * out)


def permeabilities(phi, w, grid: YGrid, params: ModelParams) -> tuple[float, float]:
    """Trapezoid moments (K_f, K_c) of the shape function against the fluid
    and ion-carrying fractions; doubled on symmetric grids."""
    phi_f, _, phi_c_t, _, _ = mixtures(np.asarray(phi, dtype=float), params)
    m = grid.weights
    k_f = float(np.sum(m * phi_f * w))
    k_c = float(np.sum(m * phi_c_t * w))
    if grid.symmetric:
        k_f *= 2.0
        k_c *= 2.0
    return k_f, k_c


def closed_form_kf(d1: float, d2: float, params: ModelParams) -> float:
    """Total-flux permeability of the layered configuration (strip-width
    corrections dropped)."""
    g1, g2, _ = params.gamma
    ls = slip_length(params)
    l1 = d1 + d2
    return (2.0 / g1) * (l1**3 / 3.0 + (g1 / g2 - 1.0) * d2**3 / 3.0 + ls * l1**2)


def closed_form_kc(d1: float, d2: float, params: ModelParams) -> float:
    """Fluid-1 partial-flux permeability of the layered configuration."""
    g1 = params.gamma[0]
    ls = slip_length(params)
    return (2.0 / g1) * (d1**3 / 3.0 + d1**2 * d2 / 2.0 + ls * d1 * (d1 + d2))
