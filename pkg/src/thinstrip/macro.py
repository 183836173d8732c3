"""Macroscopic solvers along the strip: Darcy pressure and ion transport."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .grids import XGrid
from .params import ModelParams


class PressureBCError(ValueError):
    pass


@dataclass(frozen=True)
class PressureBC:
    """Either a fixed pressure drop (Dirichlet at both ends) or a fixed flux."""

    mode: str  # "dirichlet" | "flux"
    p_in: float = 0.0
    p_out: float = 0.0
    q_f: float = 0.0

    def __post_init__(self):
        if self.mode not in ("dirichlet", "flux"):
            raise PressureBCError(f"unknown pressure mode {self.mode!r}")


def solve_pressure(k_f, bc: PressureBC, grid: XGrid):
    """Solve (−K_f p')' = 0 with K_f piecewise constant per cell.

    With linear elements on the faces this reduces to the exact two-point
    flux: the total flux is the pressure drop divided by the sum of cell
    resistances dx/K_f, and p is recovered by marching.  Returns
    ``(p_faces, q_f, dpdx)`` with dpdx constant per cell.
    """
    k_f = np.asarray(k_f, dtype=float)
    if k_f.shape != (grid.n_cells,):
        raise ValueError("k_f must hold one value per cell")
    if np.any(k_f <= 0.0):
        raise ValueError("permeability must be positive")
    dx = grid.dx
    resistance = dx / k_f
    if bc.mode == "dirichlet":
        q_f = (bc.p_in - bc.p_out) / resistance.sum()
    else:
        q_f = bc.q_f
    p = np.empty(grid.n_cells + 1)
    p[0] = bc.p_in
    p[1:] = bc.p_in - np.cumsum(q_f * resistance)
    dpdx = -q_f / k_f
    return p, float(q_f), dpdx


def _advection_terms(v, n, periodic):
    """Upwind flux stencil for one face family.

    Returns (diag, off_idx, off_val, inflow_cell, inflow_coef) describing the
    implicit part of (F_out - F_in)/dx per cell, fluxes taken from the upwind
    cell, and where Dirichlet inflow data enters in non-periodic mode.
    """
    forward = v.sum() >= 0.0
    diag = v.copy() if forward else -v  # outflux always leaves the cell itself
    rows, cols, vals = [], [], []
    if forward:
        for k in range(n):
            ku = k - 1
            if ku >= 0 or periodic:
                rows.append(k)
                cols.append(ku % n)
                vals.append(-v[ku % n])
        inflow_cell, inflow_coef = 0, (v[0] if not periodic else 0.0)
    else:
        for k in range(n):
            kd = k + 1
            if kd < n or periodic:
                rows.append(k)
                cols.append(kd % n)
                vals.append(v[kd % n])
        inflow_cell, inflow_coef = n - 1, (-v[n - 1] if not periodic else 0.0)
    return diag, rows, cols, vals, inflow_cell, inflow_coef


def ion_step(c, phi_old, phi_new, k_c, dpdx, r_total, source, dt, grid: XGrid,
             params: ModelParams, periodic: bool = True,
             c_in: float = 0.0) -> np.ndarray:
    """One implicit step of the cell-averaged ion balance.

    Storage and advection are implicit; the advective face flux is the
    upwind cell's product ``-K_c dpdx * c`` with the upwind side fixed by
    the global flow direction.  Diffusion uses arithmetically averaged face
    fractions of ``phi_new``.  The reaction enters as the explicit source
    ``(da_bar/eps_bar) r_total`` (already integrated across the strip) plus
    the volumetric supply ``phi_new * source``.

    Non-periodic runs take Dirichlet data ``c_in`` advected in on the inflow
    side and free outflow (upwind advection, no diffusive flux) elsewhere.
    """
    c = np.asarray(c, dtype=float)
    n = grid.n_cells
    dx = grid.dx
    phi_old = np.asarray(phi_old, dtype=float)
    phi_new = np.asarray(phi_new, dtype=float)
    if np.any(phi_new <= 0.0):
        raise ValueError("ion-carrying fraction must stay positive")
    v = -np.asarray(k_c, dtype=float) * np.asarray(dpdx, dtype=float)

    diag = phi_new / dt
    rhs = phi_old * c / dt + (params.da_bar / params.eps_bar) * np.asarray(r_total) \
        + phi_new * np.asarray(source)

    adiag, rows, cols, vals, in_cell, in_coef = _advection_terms(v, n, periodic)
    diag = diag + adiag / dx
    vals = [a / dx for a in vals]
    rhs[in_cell] += in_coef * c_in / dx

    # diffusion with arithmetic face fractions of phi_new
    coef = 1.0 / (params.pec_bar * dx * dx)
    for k in range(n):
        for kn in (k + 1, k - 1):
            if 0 <= kn < n or periodic:
                ph = 0.5 * (phi_new[k] + phi_new[kn % n])
                diag[k] += coef * ph
                rows.append(k)
                cols.append(kn % n)
                vals.append(-coef * ph)

    mat = sp.csc_matrix((vals, (rows, cols)), shape=(n, n)) + sp.diags(diag)
    return np.atleast_1d(spsolve(mat, rhs))


def ion_balance_residual(c, c_new, phi_old, phi_new, k_c, dpdx, r_total, source,
                         dt, grid: XGrid, params: ModelParams,
                         periodic: bool = True, c_in: float = 0.0) -> float:
    """Closure defect of the discrete ion ledger for one accepted step.

    Recomputes the fluxes used by :func:`ion_step` and returns
    ``sum(phi_new c_new) dx - sum(phi_old c) dx - dt*(sources - net outflow)``,
    which is zero up to linear-solver roundoff.
    """
    c = np.asarray(c, dtype=float)
    c_new = np.asarray(c_new, dtype=float)
    n = grid.n_cells
    dx = grid.dx
    v = -np.asarray(k_c, dtype=float) * np.asarray(dpdx, dtype=float)
    stored = np.sum(phi_new * c_new) * dx - np.sum(phi_old * c) * dx
    interior = np.sum((params.da_bar / params.eps_bar) * np.asarray(r_total)
                      + phi_new * np.asarray(source)) * dx
    outflow = 0.0
    if not periodic:
        if v.sum() >= 0.0:
            outflow = v[n - 1] * c_new[n - 1] - v[0] * c_in
        else:
            outflow = -v[0] * c_new[0] + v[n - 1] * c_in
    return float(stored - dt * (interior - outflow))
