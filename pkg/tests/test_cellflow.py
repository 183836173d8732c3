"""Transversal flow: diffuse solve, exact layered profile, permeabilities."""
import numpy as np
import pytest

from thinstrip import (
    ModelParams,
    SharpFlowProfile,
    YGrid,
    closed_form_kc,
    closed_form_kf,
    make_initial_cell,
    permeabilities,
    slip_length,
    solve_w_phasefield,
)

P = ModelParams()


def test_slip_length_formula():
    assert slip_length(P) == pytest.approx(
        P.gamma[0] / np.sqrt(P.rho3 * P.d0 * P.gamma[2]), rel=0.0)
    assert slip_length(ModelParams(d0=1e4)) == pytest.approx(0.01)
    assert slip_length(ModelParams(gamma=(2.0, 1.0, 1.0), d0=1e4)) == pytest.approx(0.02)


# ---------------------------------------------------------------------------
# exact layered profile

def test_sharp_profile_no_flow_deep_in_solid():
    prof = SharpFlowProfile(0.4, 0.3, P)
    assert prof(0.999) < 1e-4
    assert prof(-0.999) < 1e-4


def test_sharp_profile_is_even():
    prof = SharpFlowProfile(0.4, 0.3, P)
    y = np.linspace(0.0, 1.0, 57)
    assert np.allclose(prof(y), prof(-y), atol=0.0)


def test_sharp_profile_matching_conditions():
    """Velocity and stress are continuous across both layer boundaries.

    Evaluated one ulp either side of the boundary so that both branch
    formulas are exercised without picking up the (steep) solid-side slope.
    """
    prof = SharpFlowProfile(0.4, 0.3, ModelParams(gamma=(1.0, 3.0, 2.0)))
    for y0 in (0.3, 0.7):  # fluid/fluid and fluid/solid boundaries
        above = np.nextafter(y0, 2.0)
        below = np.nextafter(y0, 0.0)
        assert abs(prof(above) - prof(below)) <= 1e-12
        assert abs(prof.stress(above) - prof.stress(below)) <= 1e-12


def test_sharp_profile_stress_balances_load():
    # with unit load the momentum balance integrates to stress = -y in the fluid
    prof = SharpFlowProfile(0.45, 0.2, ModelParams(gamma=(1.5, 0.8, 1.0)))
    for y in (0.05, 0.3, 0.55, -0.6):
        assert prof.stress(y) == pytest.approx(-y, abs=1e-14)


def test_sharp_profile_curvature_matches_viscosity():
    g1, g2 = 1.0, 3.0
    prof = SharpFlowProfile(0.4, 0.3, ModelParams(gamma=(g1, g2, 1.0)))
    h = 1e-4
    for y0, g in ((0.5, g1), (0.15, g2)):
        w2 = (prof(y0 + h) - 2.0 * prof(y0) + prof(y0 - h)) / h**2
        assert w2 == pytest.approx(-1.0 / g, rel=1e-5)


def test_closed_forms_match_profile_quadrature():
    """The closed-form permeabilities are the integrals of the exact profile."""
    params = ModelParams(gamma=(1.0, 2.5, 1.3), d0=5e4)
    d1, d2 = 0.35, 0.25
    prof = SharpFlowProfile(d1, d2, params)
    y = np.linspace(-1.0, 1.0, 2_000_001)
    w = prof(y)
    kf_quad = np.trapezoid(np.where(np.abs(y) <= d1 + d2, w, 0.0), y)
    kc_quad = np.trapezoid(
        np.where((np.abs(y) > d2) & (np.abs(y) <= d1 + d2), w, 0.0), y)
    # the closed forms drop the exponentially small solid-side flux, so
    # agreement is to the quadrature/truncation error, not machine precision
    assert closed_form_kf(d1, d2, params) == pytest.approx(kf_quad, rel=2e-4)
    assert closed_form_kc(d1, d2, params) == pytest.approx(kc_quad, rel=2e-4)


def test_closed_form_values_at_reference_geometry():
    params = ModelParams(d0=1e4)
    noslip = ModelParams(d0=1e16)
    # with negligible slip the classic parabolic-channel values appear
    assert closed_form_kf(0.4, 0.3, noslip) == pytest.approx(2.0 * 0.7**3 / 3.0, rel=1e-7)
    assert closed_form_kc(0.4, 0.3, noslip) == pytest.approx(0.0906667, rel=1e-4)
    # the slip term adds L_slip * (d1+d2)^2 * 2/gamma1
    lift = closed_form_kf(0.4, 0.3, params) - closed_form_kf(0.4, 0.3, noslip)
    assert lift == pytest.approx(2.0 * 0.01 * 0.7**2, rel=1e-5)


# ---------------------------------------------------------------------------
# diffuse solve

def test_diffuse_profile_nonnegative_and_symmetric_bc():
    g = YGrid(257)
    cell = make_initial_cell(0.4, 0.3, g, P)
    w = solve_w_phasefield(cell.phi, g, P)
    assert np.all(w >= 0.0)
    assert w[0] == 0.0  # wall
    # symmetry line: zero slope to discretisation order
    assert abs(w[-1] - w[-2]) <= 2.0 * g.h * g.h


def test_diffuse_profile_converges_to_exact_when_friction_resolved():
    # pure fluid 1 everywhere: the problem degenerates to a Poiseuille solve
    # with constant (delta-shifted) viscosity; the FEM must nail the parabola
    g = YGrid(513)
    phi = np.zeros((3, g.n_nodes))
    phi[0] = 1.0
    w = solve_w_phasefield(phi, g, P)
    from thinstrip import mixtures

    _, _, _, gam, _ = mixtures(phi, P)
    w_exact = (1.0 - g.y**2) / (2.0 * gam[0])
    assert np.max(np.abs(w - w_exact)) <= 1e-5


def test_diffuse_kf_first_order_in_interface_width():
    # against the exact layered profile (quadrature, not the closed form,
    # which linearises the slip) the diffuse permeability converges at
    # first order in the interface width; d0=100 keeps the algebraic
    # interface tails from carrying extra friction
    d0 = 100.0
    errs = []
    for eps, ny in ((0.06, 513), (0.03, 1025), (0.015, 2049)):
        params = ModelParams(eps_bar=eps, d0=d0)
        g = YGrid(ny)
        cell = make_initial_cell(0.4, 0.3, g, params)
        w = solve_w_phasefield(cell.phi, g, params)
        kf, _ = permeabilities(cell.phi, w, g, params)
        prof = SharpFlowProfile(0.4, 0.3, params)
        y = np.linspace(-1.0, 0.0, 200001)
        wq = np.where(np.abs(y) <= 0.7, prof(y), 0.0)
        kf_exact = 2.0 * np.trapezoid(wq, y)
        errs.append(abs(kf - kf_exact) / kf_exact)
    assert errs[0] / errs[1] == pytest.approx(2.0, abs=0.3)
    assert errs[1] / errs[2] == pytest.approx(2.0, abs=0.3)


def test_permeabilities_double_symmetric_half():
    g_half = YGrid(257, symmetric=True)
    g_full = YGrid(513, symmetric=False)
    phi_h = np.zeros((3, g_half.n_nodes))
    phi_h[0] = 1.0
    phi_f = np.zeros((3, g_full.n_nodes))
    phi_f[0] = 1.0
    w_h = solve_w_phasefield(phi_h, g_half, P)
    w_f = solve_w_phasefield(phi_f, g_full, P)
    kf_h, kc_h = permeabilities(phi_h, w_h, g_half, P)
    kf_f, kc_f = permeabilities(phi_f, w_f, g_full, P)
    assert kf_h == pytest.approx(kf_f, rel=1e-6)
    assert kc_h == pytest.approx(kc_f, rel=1e-6)


def test_more_viscous_second_fluid_reduces_kf():
    thick = ModelParams(gamma=(1.0, 5.0, 1.0))
    assert closed_form_kf(0.4, 0.3, thick) < closed_form_kf(0.4, 0.3, P)
    g = YGrid(257)
    cell = make_initial_cell(0.4, 0.3, g, thick)
    w_thick = solve_w_phasefield(cell.phi, g, thick)
    cell0 = make_initial_cell(0.4, 0.3, g, P)
    w_base = solve_w_phasefield(cell0.phi, g, P)
    kf_thick, _ = permeabilities(cell.phi, w_thick, g, thick)
    kf_base, _ = permeabilities(cell0.phi, w_base, g, P)
    assert kf_thick < kf_base
