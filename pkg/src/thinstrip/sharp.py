"""Sharp-interface companion model on the macroscopic grid.

The layered geometry reduces to two interface graphs per cross-section: the
fluid-fluid position ``y = -d2`` and the fluid-solid position
``y = -(d1 + d2)``.  Permeabilities come from the closed-form expressions in
:mod:`thinstrip.cellflow`, the total fluid width recedes at the calibrated
reaction speed, and the fluid-fluid graph is transported by the flux-fraction
nonlinearity.  The ion balance is shared with the phase-field model through
:func:`thinstrip.macro.ion_step`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cellflow import closed_form_kc, closed_form_kf, slip_length
from .chcell import CFLViolation
from .grids import XGrid
from .macro import PressureBC, ion_step, solve_pressure
from .params import ModelParams

__all__ = [
    "SharpState",
    "StateCollapse",
    "ShockReached",
    "sharp_step",
    "flux_fraction",
    "flux_fraction_d2",
    "characteristics_oracle",
]


class StateCollapse(RuntimeError):
    """A layer width hit zero; the layered description has broken down."""


class ShockReached(RuntimeError):
    """Characteristics have crossed; the classical solution no longer exists."""


@dataclass
class SharpState:
    """Per-cell interface widths plus the macroscopic fields of the last step."""

    d1: np.ndarray
    d2: np.ndarray
    c: np.ndarray
    p: np.ndarray | None = None
    q_f: float = 0.0
    k_f: np.ndarray | None = None
    k_c: np.ndarray | None = None
    dpdx: np.ndarray | None = None

    @property
    def total(self) -> np.ndarray:
        return self.d1 + self.d2

    def validate(self, params: ModelParams):
        half = 0.5 * params.ell_omega
        if np.any(self.d1 <= 0.0) or np.any(self.d2 <= 0.0):
            raise StateCollapse("a layer width is no longer positive")
        if np.any(self.total >= half):
            raise StateCollapse("fluid layers exceed the strip half-width")


def flux_fraction(d2, total, params: ModelParams):
    """K_c/K_f for widths (total - d2, d2); the transported flux nonlinearity."""
    d2 = np.asarray(d2, dtype=float)
    d1 = np.asarray(total, dtype=float) - d2
    kf = closed_form_kf(d1, d2, params)
    return closed_form_kc(d1, d2, params) / kf


def flux_fraction_d2(d2, total, params: ModelParams):
    """Analytic derivative of :func:`flux_fraction` in d2 at fixed total width.

    Differentiating the closed forms with d1 = total - d2 gives

        dK_f/dd2 = (2/g1) (g1/g2 - 1) d2^2
        dK_c/dd2 = -(2/g1) (d1^2/2 + d1 d2 + L_slip * total)

    and the quotient rule does the rest.  Used for upwinding decisions, CFL
    bounds and the characteristic speeds of the oracle.
    """
    d2 = np.asarray(d2, dtype=float)
    total = np.asarray(total, dtype=float)
    d1 = total - d2
    g1, g2, _ = params.gamma
    ls = slip_length(params)
    kf = closed_form_kf(d1, d2, params)
    kc = closed_form_kc(d1, d2, params)
    dkf = (2.0 / g1) * (g1 / g2 - 1.0) * d2 ** 2
    dkc = -(2.0 / g1) * (0.5 * d1 ** 2 + d1 * d2 + ls * total)
    return (dkc * kf - kc * dkf) / kf ** 2


def _upwind_flux_update(d2, total, q_f, dt, dx, params, periodic):
    """Conservative upwind update of d2 under the flux -(q_f/2) g(d2)."""
    n = d2.size
    g = flux_fraction(d2, total, params)
    # face characteristic speeds from the analytic derivative at the mean state
    if periodic:
        left = np.arange(n)
        right = (left + 1) % n
    else:
        left = np.arange(n - 1)
        right = left + 1
    d2f = 0.5 * (d2[left] + d2[right])
    totf = 0.5 * (np.broadcast_to(total, d2.shape)[left]
                  + np.broadcast_to(total, d2.shape)[right])
    speed = -(q_f / 2.0) * flux_fraction_d2(d2f, totf, params)
    flux = np.where(speed > 0.0, -(q_f / 2.0) * g[left], -(q_f / 2.0) * g[right])

    cfl = np.max(np.abs(speed)) * dt / dx if speed.size else 0.0
    if cfl > 1.0:
        raise CFLViolation(
            f"sharp transport CFL {cfl:.3f} > 1; reduce dt below "
            f"{dx / max(np.max(np.abs(speed)), 1e-300):.3e}")

    dnew = d2.copy()
    if periodic:
        # flux[k] lives on the face between cells k and k+1
        dnew -= (dt / dx) * (flux - np.roll(flux, 1))
    else:
        full = np.empty(n + 1)
        full[1:-1] = flux
        full[0] = flux[0]
        full[-1] = flux[-1]
        dnew -= (dt / dx) * (full[1:] - full[:-1])
    return dnew


def sharp_step(prev: SharpState, dt: float, params: ModelParams,
               bc: PressureBC, grid: XGrid, source=0.0,
               periodic: bool = True, rate=None, c_in: float = 0.0) -> SharpState:
    """Advance the interface-graph model by one explicit step.

    Sequence: closed-form permeabilities, pressure solve, conservative upwind
    transport of the fluid-fluid graph, uniform recession of the total width
    at the reaction speed, then the shared implicit ion step with the
    ion-carrying fraction 2*d1.
    """
    prev.validate(params)
    d1, d2, c = prev.d1, prev.d2, prev.c
    total = d1 + d2

    k_f = closed_form_kf(d1, d2, params)
    k_c = closed_form_kc(d1, d2, params)
    p, q_f, dpdx = solve_pressure(k_f, bc, grid)

    d2_new = _upwind_flux_update(d2, total, q_f, dt, grid.dx, params, periodic)

    r = params.linear_rate(c) if rate is None else rate(c)
    total_new = total - dt * params.da_bar * np.asarray(r, dtype=float)
    d1_new = total_new - d2_new

    nxt = SharpState(d1_new, d2_new, c, p=p, q_f=q_f, k_f=k_f, k_c=k_c, dpdx=dpdx)
    nxt.validate(params)

    r_total = -2.0 * params.eps_bar * np.asarray(r, dtype=float)
    c_new = ion_step(c, 2.0 * d1, 2.0 * d1_new, k_c, dpdx, r_total, source,
                     dt, grid, params, periodic=periodic, c_in=c_in)
    nxt.c = c_new
    return nxt


def characteristics_oracle(d2_init, total: float, q_f: float, t: float,
                           x_eval, params: ModelParams, *, period: float = 1.0,
                           n_samples: int = 4001):
    """Exact pre-shock solution of the fluid-fluid transport by characteristics.

    ``d2_init`` is a callable sampled densely on one period.  Each sample is
    carried with the constant speed -(q_f/2) g'(d2) of its characteristic;
    the result is read back on ``x_eval`` by monotone (periodic linear)
    interpolation.  Also estimates the first crossing time t* from the most
    negative compression rate of the characteristic field.

    Returns ``(d2 at x_eval, t_star)``; raises :class:`ShockReached` when the
    requested time is at or beyond t*.
    """
    x0 = np.linspace(0.0, period, n_samples)
    d20 = np.asarray(d2_init(x0), dtype=float)
    speed = -(q_f / 2.0) * flux_fraction_d2(d20, total, params)

    stretch = np.gradient(speed, x0)
    worst = stretch.min()
    t_star = np.inf if worst >= 0.0 else -1.0 / worst
    if t >= t_star:
        raise ShockReached(
            f"requested t={t:g} at or beyond the shock time t*={t_star:g}")

    x_t = x0 + speed * t
    d2 = np.interp(np.asarray(x_eval, dtype=float), x_t, d20, period=period)
    return d2, float(t_star)
