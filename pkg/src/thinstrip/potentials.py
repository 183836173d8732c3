"""Free-energy ingredients: double/triple well, phase mixtures, reaction terms.

Phase triples are passed as arrays whose leading axis has length 3, so every
function works on a single point ``(3,)`` as well as on a nodal field
``(3, n)``.
"""
from __future__ import annotations

import numpy as np

from .params import ModelParams

PHI_MIN = 1e-16  # bisection bracket for the equilibrium profile inverse


class DomainError(ValueError):
    """Raised when a potential is evaluated outside its admissible range."""


def _check_barrier_arg(x):
    # The barrier blows up at -1; values at or below -1 + 1e-12 are rejected
    # instead of silently returning huge numbers.
    if np.any(x <= -1.0 + 1e-12):
        raise DomainError("barrier argument out of range (phase fraction beyond "
                          "the admissible interval)")


def _ell(x):
    """Barrier x^2/(1+x) on (-1, 0), zero for x >= 0."""
    x = np.asarray(x, dtype=float)
    _check_barrier_arg(x)
    neg = x < 0.0
    xs = np.where(neg, x, 0.0)
    return np.where(neg, xs * xs / (1.0 + xs), 0.0)


def _ell_d1(x):
    x = np.asarray(x, dtype=float)
    _check_barrier_arg(x)
    neg = x < 0.0
    xs = np.where(neg, x, 0.0)
    return np.where(neg, xs * (xs + 2.0) / (1.0 + xs) ** 2, 0.0)


def _ell_d2(x):
    x = np.asarray(x, dtype=float)
    _check_barrier_arg(x)
    neg = x < 0.0
    xs = np.where(neg, x, 0.0)
    return np.where(neg, 2.0 / (1.0 + xs) ** 3, 0.0)


def double_well(phi, delta: float):
    """Quartic well 450 phi^4 (1-phi)^4 plus barrier terms keeping
    phi inside (-delta, 1+delta).  With delta = 0 the admissible range
    collapses to [0, 1]."""
    phi = np.asarray(phi, dtype=float)
    w = 450.0 * phi**4 * (1.0 - phi) ** 4
    if delta > 0.0:
        w = w + delta * _ell(phi / delta) + delta * _ell((1.0 - phi) / delta)
    else:
        if np.any((phi < 0.0) | (phi > 1.0)):
            raise DomainError("phi outside [0, 1] with delta = 0")
    return w


def double_well_d1(phi, delta: float):
    """First derivative of :func:`double_well`."""
    phi = np.asarray(phi, dtype=float)
    d = 1800.0 * phi**3 * (1.0 - phi) ** 3 * (1.0 - 2.0 * phi)
    if delta > 0.0:
        d = d + _ell_d1(phi / delta) - _ell_d1((1.0 - phi) / delta)
    else:
        if np.any((phi < 0.0) | (phi > 1.0)):
            raise DomainError("phi outside [0, 1] with delta = 0")
    return d


def double_well_d2(phi, delta: float):
    """Second derivative of :func:`double_well`."""
    phi = np.asarray(phi, dtype=float)
    d = 1800.0 * phi**2 * (1.0 - phi) ** 2 * (3.0 * (1.0 - 2.0 * phi) ** 2
                                              - 2.0 * phi * (1.0 - phi))
    if delta > 0.0:
        d = d + (_ell_d2(phi / delta) + _ell_d2((1.0 - phi) / delta)) / delta
    else:
        if np.any((phi < 0.0) | (phi > 1.0)):
            raise DomainError("phi outside [0, 1] with delta = 0")
    return d


def _sigma_arrays(params: ModelParams):
    sig = np.asarray(params.sigma, dtype=float)
    inv = 1.0 / sig
    sig_t = 1.0 / inv.sum()
    return sig, inv, sig_t


def project(phi, params: ModelParams):
    """Affine projection onto the plane phi1 + phi2 + phi3 = 1.

    The correction is distributed proportionally to 1/sigma_i, so states
    already on the plane are returned unchanged.
    """
    phi = np.asarray(phi, dtype=float)
    _, inv, sig_t = _sigma_arrays(params)
    defect = 1.0 - phi.sum(axis=0)
    shape = (3,) + (1,) * (phi.ndim - 1)
    return phi + sig_t * defect * inv.reshape(shape)


def triple_well(phi, params: ModelParams):
    """Three-phase potential: sigma-weighted double wells of the projected state."""
    p = project(phi, params)
    sig, _, _ = _sigma_arrays(params)
    shape = (3,) + (1,) * (p.ndim - 1)
    return (sig.reshape(shape) * double_well(p, params.delta)).sum(axis=0)


def triple_well_grad(phi, params: ModelParams):
    """Gradient of :func:`triple_well` with respect to the unprojected state.

    The projection has constant Jacobian ``I - sig_t * (1/sigma) 1^T``; the
    chain rule collapses to a sigma-weighted derivative minus a shared trace
    term.
    """
    p = project(phi, params)
    sig, _, sig_t = _sigma_arrays(params)
    shape = (3,) + (1,) * (p.ndim - 1)
    s = sig.reshape(shape) * double_well_d1(p, params.delta)
    return s - sig_t * s.sum(axis=0)


def triple_well_hess(phi, params: ModelParams):
    """Hessian of :func:`triple_well`; shape ``(3, 3)`` plus field axes.

    Used by the Newton linearisation of the cell step.
    """
    p = project(phi, params)
    sig, inv, sig_t = _sigma_arrays(params)
    shape = (3,) + (1,) * (p.ndim - 1)
    d2 = sig.reshape(shape) * double_well_d2(p, params.delta)  # sigma_i * W''(p_i)
    # H = J^T diag(d2) J with J = I - sig_t * inv 1^T
    jac = np.eye(3) - sig_t * np.outer(inv, np.ones(3))
    # einsum over the 3x3 part, broadcasting any trailing field axes
    return np.einsum("ia,a...,aj->ij...", jac.T, d2, jac)


class MixtureError(ValueError):
    pass


def mixtures(phi, params: ModelParams):
    """Effective fields entering the flow and transport problems.

    Returns ``(phi_f_tilde, phi_c, phi_c_tilde, gamma_tilde, d_value)``:
    regularised fluid fraction, ion-carrying fraction and its regularised
    version, harmonically mixed viscosity, and the friction coefficient
    ``d0 (1 - phi_f_tilde)^2``.
    """
    phi = np.asarray(phi, dtype=float)
    delta = params.delta
    phi_f = phi[0] + phi[1] + 2.0 * delta * phi[2]
    phi_c = phi[0]
    phi_c_t = phi[0] + delta
    g = np.asarray(params.gamma, dtype=float)
    denom = (phi[0] / g[0] + phi[1] / g[1] + phi[2] / g[2]
             + delta * (1.0 / g[0] + 1.0 / g[1] + 1.0 / g[2]))
    if np.any(denom <= 0.0):
        raise MixtureError("mixed viscosity denominator not positive")
    gamma_t = 1.0 / denom
    d_val = params.d0 * (1.0 - phi_f) ** 2
    return phi_f, phi_c, phi_c_t, gamma_t, d_val


def reaction_q(phi):
    """Interface indicator 30 phi1^2 phi3^2; integrates to ~eps_bar across a
    fluid1/solid transition and is negligible elsewhere."""
    phi = np.asarray(phi, dtype=float)
    return 30.0 * phi[0] ** 2 * phi[2] ** 2


def rate_r(c, c_eq: float = 0.5):
    """Default linear precipitation rate (positive when oversaturated)."""
    return np.asarray(c, dtype=float) - c_eq


def reaction_R(phi, c, mu1, mu3, params: ModelParams, rate=None):
    """Phase-change source: negative where fluid 1 precipitates into solid."""
    if rate is None:
        r = rate_r(c, params.c_eq)
    else:
        r = rate(c)
    return -reaction_q(phi) * (r + params.alpha_tilde * (np.asarray(mu1) - np.asarray(mu3)))


def profile_z(phi):
    """Signed coordinate at which the planar equilibrium profile takes value phi.

    Monotone on (0, 1) with profile_z(1/2) = 0; diverges at both ends.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any((phi <= 0.0) | (phi >= 1.0)):
        raise DomainError("profile_z defined on the open interval (0, 1)")
    return (1.0 / (1.0 - phi) - 1.0 / phi + 2.0 * np.log(phi / (1.0 - phi))) / 30.0


def equilibrium_profile(z):
    """Inverse of :func:`profile_z` by bisection (absolute tolerance 1e-12).

    Far tails saturate towards 0 and 1 algebraically like 1/(30|z|).
    """
    z = np.asarray(z, dtype=float)
    lo = np.full(z.shape, PHI_MIN)
    hi = np.full(z.shape, 1.0 - 1e-16)
    # profile_z is increasing in phi, so plain bisection applies; beyond the
    # bracket the result saturates at the bracket ends.
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        take_hi = profile_z(mid) < z
        lo = np.where(take_hi, mid, lo)
        hi = np.where(take_hi, hi, mid)
        if np.max(hi - lo) < 1e-12:
            break
    out = 0.5 * (lo + hi)
    return out if out.ndim else float(out)
