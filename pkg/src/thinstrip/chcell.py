"""Per-column phase evolution: coupled Cahn-Hilliard / transversal-flow step.

Each x-column carries its own one-dimensional phase problem across the strip.
A step advances (phi1, phi2, mu1, mu2) implicitly in y with explicit upwinded
x-fluxes; phi3 and mu3 follow from the algebraic constraints phi1+phi2+phi3=1
and mu1+mu2+mu3 = 0, and the transversal velocity is eliminated analytically:
with the x-divergence sources frozen over the step, the mixture continuity
recurrence integrates in closed form to v2 = -(integral of the divergence
from the wall)/ff(phi), which is local in y.  The nonlinear system is solved
by a damped Newton iteration with an analytic Jacobian assembled in banded
form (nearest-neighbour coupling only, four unknowns per node).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .grids import YGrid
from .params import ModelParams
from .potentials import (DomainError, equilibrium_profile, project, rate_r,
                         reaction_q, reaction_R, triple_well_grad,
                         triple_well_hess)

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 30
MAX_HALVINGS = 14
MAX_SUBDIVISIONS = 8
CFL_SAFETY = 0.8


class NewtonDiverged(RuntimeError):
    pass


class CFLViolation(RuntimeError):
    pass


class GeometryError(ValueError):
    pass


@dataclass
class NewtonInfo:
    iterations: int = 0
    residuals: list = field(default_factory=list)
    substeps: int = 1
    # time-weighted reaction integral over the step; equals the plain
    # end-of-step integral when no subdivision happened, and keeps the
    # discrete mass budget exact when it did
    reaction_avg: float = 0.0


@dataclass
class CellState:
    """Snapshot of one x-column: phase fields, potentials and velocities."""

    grid: YGrid
    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    mu3: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    w: np.ndarray | None = None
    info: NewtonInfo | None = None

    @property
    def phi(self) -> np.ndarray:
        return np.array([self.phi1, self.phi2, self.phi3])

    def validate(self, params: ModelParams):
        tol = 1e-10
        lo, hi = -params.delta - tol, 1.0 + params.delta + tol
        fields = np.array([self.phi1, self.phi2, self.phi3])
        if np.any(fields < lo) or np.any(fields > hi):
            raise DomainError("phase fractions escaped the admissible interval")
        if np.max(np.abs(self.phi1 + self.phi2 + self.phi3 - 1.0)) > 1e-12:
            raise DomainError("phase fractions do not sum to one")
        if np.max(np.abs(self.mu1 + self.mu2 + self.mu3)) > 1e-12:
            raise DomainError("chemical potentials do not sum to zero")


def make_initial_cell(d1: float, d2: float, grid: YGrid, params: ModelParams) -> CellState:
    """Layered column: solid below -(d1+d2), fluid 1 up to -d2, fluid 2 above.

    Both transitions are equilibrium profiles of width eps_bar; the fields are
    combined multiplicatively so they sum to one exactly and the fluid1/fluid2
    equality holds exactly at y = -d2.
    """
    if not grid.symmetric:
        raise GeometryError("initial columns are defined on the symmetric half-strip")
    eps = params.eps_bar
    half = 0.5 * params.ell_omega
    gaps = (d1, d2, half - d1 - d2)
    # below two interface widths the transitions merge and the layered
    # description stops making sense; wider separations only degrade the
    # algebraic tails gracefully
    if min(gaps) < 2.0 * eps:
        raise GeometryError(
            f"interfaces too close to each other or to the boundaries: {gaps}")
    t13 = equilibrium_profile((grid.y + d1 + d2) / eps)
    t12 = equilibrium_profile((grid.y + d2) / eps)
    phi1 = t13 * (1.0 - t12)
    phi2 = t13 * t12
    phi3 = 1.0 - t13
    zeros = np.zeros(grid.n_nodes)
    return CellState(grid, phi1, phi2, phi3, zeros.copy(), zeros.copy(),
                     zeros.copy(), zeros.copy(), zeros.copy())


def _stiffness_apply(x, h):
    """Linear-element stiffness (Neumann): (A x)_i = integral x' hat_i'."""
    out = np.empty_like(x)
    out[1:-1] = (2.0 * x[1:-1] - x[:-2] - x[2:]) / h
    out[0] = (x[0] - x[1]) / h
    out[-1] = (x[-1] - x[-2]) / h
    return out


def _face_divergence(f):
    """Nodal weighted divergence of a flux: midpoint faces, boundary faces
    pinned to the boundary nodal values.  Sums exactly to f[-1] - f[0]."""
    faces = np.empty(f.shape[0] + 1)
    faces[1:-1] = 0.5 * (f[:-1] + f[1:])
    faces[0] = f[0]
    faces[-1] = f[-1]
    return faces[1:] - faces[:-1]


def _cumtrapz_from_wall(g, h):
    out = np.empty_like(g)
    out[0] = 0.0
    np.cumsum(0.5 * h * (g[:-1] + g[1:]), out=out[1:])
    return out


def _advection_sources(prev: CellState, upstream: CellState, dx: float,
                       params: ModelParams, flow_sign: float):
    """Explicit upwinded x-divergences, per field and for the fluid mixture."""
    delta = params.delta
    ff_prev = 2.0 * delta + (1.0 - 2.0 * delta) * (prev.phi1 + prev.phi2)
    ff_up = 2.0 * delta + (1.0 - 2.0 * delta) * (upstream.phi1 + upstream.phi2)
    a1 = flow_sign * (prev.phi1 * prev.v1 - upstream.phi1 * upstream.v1) / dx
    a2 = flow_sign * (prev.phi2 * prev.v1 - upstream.phi2 * upstream.v1) / dx
    g_div = flow_sign * (ff_prev * prev.v1 - ff_up * upstream.v1) / dx
    return a1, a2, g_div


def _column_system(prev: CellState, upstream: CellState, dx: float, dt: float,
                   rc: float, params: ModelParams, flow_sign: float, adv=None):
    """Residual/Jacobian closures and the initial guess for one column step.

    Exposed separately from :func:`ch_step` so the analytic Jacobian can be
    compared against finite differences of the residual in tests.  ``adv``
    optionally provides the explicit x-divergences ``(a1, a2, g_div)``; when
    a step is subdivided they stay frozen at the start-of-step values so the
    advected mass still telescopes exactly between neighbouring columns.
    """
    grid = prev.grid
    n = grid.n_nodes
    h = grid.h
    m = grid.weights
    delta = params.delta
    eps = params.eps_bar
    sig1, sig2, _ = params.sigma
    mob1 = eps * params.m_bar / sig1
    mob2 = eps * params.m_bar / sig2
    da_eps = params.da_bar / eps
    at = params.alpha_tilde

    def ftilde(p1, p2):
        return 2.0 * delta + (1.0 - 2.0 * delta) * (p1 + p2)

    if adv is None:
        adv = _advection_sources(prev, upstream, dx, params, flow_sign)
    a1, a2, g_div = adv
    ff_prev = ftilde(prev.phi1, prev.phi2)

    phi1n, phi2n = prev.phi1, prev.phi2

    # the transversal velocity is a local function of the iterate: with the
    # divergence sources frozen, the continuity recurrence integrates to
    # v2 = -cum/ff(p1, p2) node by node
    cum = _cumtrapz_from_wall(g_div, h)
    dff = 1.0 - 2.0 * delta

    def unpack(u):
        return u[0::4], u[1::4], u[2::4], u[3::4]

    def residual(u):
        p1, p2, q1, q2 = unpack(u)
        p3 = 1.0 - p1 - p2
        phi = np.array([p1, p2, p3])
        gw = triple_well_grad(phi, params)  # raises DomainError when escaping
        qr = reaction_q(phi)
        r = np.empty_like(u)
        v2 = -cum / ftilde(p1, p2)
        r[0::4] = (m * ((p1 - phi1n) / dt + a1
                        + da_eps * qr * (rc + at * (2.0 * q1 + q2)))
                   + _face_divergence(p1 * v2) + mob1 * _stiffness_apply(q1, h))
        r[1::4] = (m * ((p2 - phi2n) / dt + a2)
                   + _face_divergence(p2 * v2) + mob2 * _stiffness_apply(q2, h))
        r[2::4] = m * (q1 - gw[0] / eps) - eps * sig1 * _stiffness_apply(p1, h)
        r[3::4] = m * (q2 - gw[1] / eps) - eps * sig2 * _stiffness_apply(p2, h)
        return r

    # banded Jacobian: 4 unknowns per node, coupling only between neighbours
    half_bw = 7
    n_unk = 4 * n

    # iterate-independent pieces, shared by every Jacobian evaluation
    ones_h = np.full(n, 1.0 / h)
    stiff_diag = np.full(n, 2.0 / h)
    stiff_diag[0] = stiff_diag[-1] = 1.0 / h
    # the pinned boundary faces add in-node divergence entries at the ends
    bnd = np.zeros(n)
    bnd[0], bnd[-1] = -0.5, 0.5
    diag_react = m / dt

    def at_prev(x):
        # x_{i-1} aligned to row i (row 0 entry unused)
        out = np.empty_like(x)
        out[0] = 0.0
        out[1:] = x[:-1]
        return out

    def at_next(x):
        # x_{i+1} aligned to row i (last row entry unused)
        out = np.empty_like(x)
        out[-1] = 0.0
        out[:-1] = x[1:]
        return out

    def jacobian(u):
        p1, p2, q1, q2 = unpack(u)
        p3 = 1.0 - p1 - p2
        phi = np.array([p1, p2, p3])
        hess = triple_well_hess(phi, params)
        qr = reaction_q(phi)
        dq1 = 60.0 * p1 * p3 * (p3 - p1)           # d q / d phi1 along the plane
        dq2 = -60.0 * p1**2 * p3                   # d q / d phi2 along the plane
        mu_fac = rc + at * (2.0 * q1 + q2)
        ff = ftilde(p1, p2)
        v2 = -cum / ff
        dv2 = -v2 * dff / ff  # d v2 / d p1 == d v2 / d p2, local in y

        ab = np.zeros((2 * half_bw + 1, n_unk))

        def put(row_var, col_var, offset, coeff, lo=0, hi=n):
            # A[4i+row_var, 4(i+offset)+col_var] += coeff[lo:hi], i in [lo,hi)
            band = half_bw + row_var - col_var - 4 * offset
            cols = slice(4 * (lo + offset) + col_var,
                         4 * (hi - 1 + offset) + col_var + 1, 4)
            ab[band, cols] += coeff[lo:hi]

        # divergence faces of p*v2(p1,p2): own-phase and cross-phase columns
        d1_own = v2 + p1 * dv2
        d1_cross = p1 * dv2
        d2_own = v2 + p2 * dv2
        d2_cross = p2 * dv2

        # --- phi1 row -------------------------------------------------
        put(0, 0, 0, diag_react + m * da_eps * dq1 * mu_fac + bnd * d1_own)
        put(0, 1, 0, m * da_eps * dq2 * mu_fac + bnd * d1_cross)
        put(0, 2, 0, m * da_eps * qr * at * 2.0)
        put(0, 3, 0, m * da_eps * qr * at)
        put(0, 0, 1, 0.5 * at_next(d1_own), 0, n - 1)
        put(0, 1, 1, 0.5 * at_next(d1_cross), 0, n - 1)
        put(0, 0, -1, -0.5 * at_prev(d1_own), 1, n)
        put(0, 1, -1, -0.5 * at_prev(d1_cross), 1, n)
        # mobility stiffness on mu1
        put(0, 2, 0, mob1 * stiff_diag)
        put(0, 2, 1, -mob1 * ones_h, 0, n - 1)
        put(0, 2, -1, -mob1 * ones_h, 1, n)

        # --- phi2 row -------------------------------------------------
        put(1, 1, 0, diag_react + bnd * d2_own)
        put(1, 0, 0, bnd * d2_cross)
        put(1, 1, 1, 0.5 * at_next(d2_own), 0, n - 1)
        put(1, 0, 1, 0.5 * at_next(d2_cross), 0, n - 1)
        put(1, 1, -1, -0.5 * at_prev(d2_own), 1, n)
        put(1, 0, -1, -0.5 * at_prev(d2_cross), 1, n)
        put(1, 3, 0, mob2 * stiff_diag)
        put(1, 3, 1, -mob2 * ones_h, 0, n - 1)
        put(1, 3, -1, -mob2 * ones_h, 1, n)

        # --- mu rows: the well gradient is differentiated through the
        # substitution phi3 = 1 - phi1 - phi2
        dg0_d1 = hess[0, 0] - hess[0, 2]
        dg0_d2 = hess[0, 1] - hess[0, 2]
        dg1_d1 = hess[1, 0] - hess[1, 2]
        dg1_d2 = hess[1, 1] - hess[1, 2]

        put(2, 2, 0, m)
        put(2, 0, 0, -m * dg0_d1 / eps - eps * sig1 * stiff_diag)
        put(2, 0, 1, eps * sig1 * ones_h, 0, n - 1)
        put(2, 0, -1, eps * sig1 * ones_h, 1, n)
        put(2, 1, 0, -m * dg0_d2 / eps)

        put(3, 3, 0, m)
        put(3, 1, 0, -m * dg1_d2 / eps - eps * sig2 * stiff_diag)
        put(3, 1, 1, eps * sig2 * ones_h, 0, n - 1)
        put(3, 1, -1, eps * sig2 * ones_h, 1, n)
        put(3, 0, 0, -m * dg1_d1 / eps)
        return ab

    # initial guess: the previous fields
    u0 = np.empty(n_unk)
    u0[0::4] = prev.phi1
    u0[1::4] = prev.phi2
    u0[2::4] = prev.mu1
    u0[3::4] = prev.mu2

    def finish(u, info):
        p1, p2, q1, q2 = unpack(u)
        v2 = -cum / ftilde(p1, p2)  # exact divergence integral
        return CellState(grid, p1, p2, 1.0 - p1 - p2, q1, q2, -q1 - q2,
                         prev.v1, v2, prev.w, info)

    return residual, jacobian, u0, finish


def _newton_solve(residual, jacobian, u, tol, max_iter):
    """Damped Newton on the banded column system; raises NewtonDiverged."""
    info = NewtonInfo()
    res = residual(u)
    norm = np.max(np.abs(res))
    info.residuals.append(norm)
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise NewtonDiverged(
                f"no convergence after {max_iter} iterations (residual {norm:.3e})")
        ab = jacobian(u)
        half_bw = (ab.shape[0] - 1) // 2
        try:
            step = solve_banded((half_bw, half_bw), ab, -res)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise NewtonDiverged(f"singular Jacobian: {exc}") from exc
        scale = 1.0
        for _ in range(MAX_HALVINGS):
            try:
                res_new = residual(u + scale * step)
            except DomainError:
                scale *= 0.5
                continue
            norm_new = np.max(np.abs(res_new))
            if norm_new <= norm or norm_new <= tol:
                break
            scale *= 0.5
        else:
            raise NewtonDiverged("line search failed to find an admissible step")
        u = u + scale * step
        res, norm = res_new, norm_new
        it += 1
        info.residuals.append(norm)
        # fail fast on stalls: a healthy solve collapses the residual within
        # a few iterations, while crawling progress (heavy damping, or a norm
        # stuck near its starting value) never recovers at this dt and is
        # cheaper to finish as two half steps
        if norm > 1e3 * tol and (scale <= 2.0 ** -6 or
                                 (it >= 5 and norm > 0.2 * info.residuals[0])):
            raise NewtonDiverged(
                f"stalled after {it} iterations (residual {norm:.3e})")
    info.iterations = it
    return u, info


def _advance_column(prev, upstream, dx, dt, rc, c_at_x, params, rate,
                    flow_sign, tol, max_iter, adv, depth):
    """One implicit column update, halving dt recursively when Newton stalls.

    Freshly constructed profiles can sit close to a fold of the one-step map
    at cruise dt (the potentials are far from convex across an interface); a
    few shorter steps walk around it, after which full steps converge again.
    """
    residual, jacobian, u0, finish = _column_system(
        prev, upstream, dx, dt, rc, params, flow_sign, adv=adv)
    try:
        u, info = _newton_solve(residual, jacobian, u0, tol, max_iter)
    except NewtonDiverged:
        if depth >= MAX_SUBDIVISIONS:
            raise
        mid = _advance_column(prev, upstream, dx, 0.5 * dt, rc, c_at_x, params,
                              rate, flow_sign, tol, max_iter, adv, depth + 1)
        out = _advance_column(mid, upstream, dx, 0.5 * dt, rc, c_at_x, params,
                              rate, flow_sign, tol, max_iter, adv, depth + 1)
        out.info.substeps += mid.info.substeps
        out.info.iterations += mid.info.iterations
        out.info.reaction_avg = 0.5 * (mid.info.reaction_avg
                                       + out.info.reaction_avg)
        return out
    new = finish(u, info)
    _, info.reaction_avg = cell_integrals(new, c_at_x, params, rate=rate)
    return new


def ch_step(prev: CellState, upstream: CellState, dx: float, dt: float,
            c_at_x: float, dpdx: float, params: ModelParams, rate=None,
            flow_sign: float = 1.0, tol: float = NEWTON_TOL,
            max_iter: int = NEWTON_MAX_ITER) -> CellState:
    """Advance one column by dt.

    ``upstream`` is the neighbouring column on the side the flow comes from;
    ``flow_sign`` is +1 when that neighbour sits at smaller x and -1
    otherwise, so the explicit advective difference is always upwinded.  The
    caller prepares ``v1 = -w dpdx`` on both columns; ``dpdx`` is taken here
    for the contract check only.  The transversal velocity v2 is part of the
    Newton system (its equation is the exact wall-to-node integral of the
    divergence constraint) and is re-normalised from the converged fractions
    afterwards.

    If the Newton solve stalls the step is retried as two half steps (and so
    on, a few levels deep) with the explicit x-fluxes kept frozen at their
    start-of-step values, so mass exchange with the neighbouring columns is
    unchanged by the subdivision.  ``info.reaction_avg`` on the returned
    state carries the time-weighted reaction integral that the discrete mass
    budget actually saw.
    """
    grid = prev.grid
    if not grid.symmetric:
        raise GeometryError("cell steps operate on the symmetric half-strip")
    if prev.w is not None and not np.array_equal(prev.v1, -prev.w * dpdx):
        raise GeometryError("v1 was not prepared as -w*dpdx for this column")
    rc = float(rate(c_at_x)) if rate is not None else float(rate_r(c_at_x, params.c_eq))

    vmax = max(np.max(np.abs(prev.v1)), np.max(np.abs(upstream.v1)))
    if dt * vmax > CFL_SAFETY * dx * (1.0 + 1e-12):
        raise CFLViolation(
            f"dt={dt:g} exceeds {CFL_SAFETY}*dx/max|v1|={CFL_SAFETY*dx/max(vmax,1e-300):g}")

    adv = _advection_sources(prev, upstream, dx, params, flow_sign)
    return _advance_column(prev, upstream, dx, dt, rc, c_at_x, params, rate,
                           flow_sign, tol, max_iter, adv, 0)


def cell_integrals(state: CellState, c_at_x: float, params: ModelParams,
                   rate=None) -> tuple[float, float]:
    """Strip-averaged quantities feeding the ion equation: the regularised
    ion-carrying fraction and the total reaction (doubled on half grids)."""
    m = state.grid.weights
    phi_ct = state.phi1 + params.delta
    r = reaction_R(state.phi, c_at_x, state.mu1, state.mu3, params, rate=rate)
    fac = 2.0 if state.grid.symmetric else 1.0
    return fac * float(np.sum(m * phi_ct)), fac * float(np.sum(m * r))


def mixture_energy(state: CellState, params: ModelParams) -> float:
    """Ginzburg-Landau energy of the column (gradient part plus well)."""
    from .potentials import triple_well
    grid = state.grid
    h = grid.h
    m = grid.weights
    well = triple_well(state.phi, params)
    e = float(np.sum(m * well)) / params.eps_bar
    for f, s in ((state.phi1, params.sigma[0]), (state.phi2, params.sigma[1]),
                 (state.phi3, params.sigma[2])):
        grad = np.diff(f) / h
        e += 0.5 * params.eps_bar * s * float(np.sum(grad**2)) * h
    return e


def extract_interfaces(state: CellState) -> list[tuple[int, float]]:
    """Locate phase boundaries: crossings phi_i = phi_j with both above 1/3.

    Returns ``(pair, y)`` tuples with pair in {12, 13, 23}, sorted by y.
    """
    y = state.grid.y
    fields = {1: state.phi1, 2: state.phi2, 3: state.phi3}
    found = []
    for i, j in ((1, 2), (1, 3), (2, 3)):
        d = fields[i] - fields[j]
        sgn = np.sign(d)
        for k in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
            frac = d[k] / (d[k] - d[k + 1])
            y_star = y[k] + frac * (y[k + 1] - y[k])
            val = fields[i][k] + frac * (fields[i][k + 1] - fields[i][k])
            if val > 1.0 / 3.0:
                found.append((10 * i + j, float(y_star)))
        for k in np.nonzero(sgn == 0)[0]:
            if fields[i][k] > 1.0 / 3.0:
                found.append((10 * i + j, float(y[k])))
    return sorted(found, key=lambda t: t[1])
