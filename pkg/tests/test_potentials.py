"""Potential landscape, projection and mixture-coefficient checks."""
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from thinstrip import (
    DomainError,
    ModelParams,
    double_well,
    double_well_d1,
    double_well_d2,
    equilibrium_profile,
    mixtures,
    profile_z,
    project,
    rate_r,
    reaction_R,
    reaction_q,
    triple_well,
    triple_well_grad,
    triple_well_hess,
)

DELTA = 0.03
PARAMS = ModelParams()


# ---------------------------------------------------------------------------
# scalar double well

def test_double_well_symmetry_and_minima():
    # stay 1e-4 clear of the barrier poles: the mirroring 1 - phi loses one
    # ulp there and the pole derivative amplifies it out of tolerance
    phi = np.linspace(-DELTA + 1e-4, 1.0 + DELTA - 1e-4, 801)
    w = double_well(phi, DELTA)
    w_mirror = double_well(1.0 - phi, DELTA)
    assert np.allclose(w, w_mirror, rtol=1e-11, atol=1e-13)
    assert np.all(w >= -1e-15)
    assert double_well(0.0, DELTA) == 0.0
    assert double_well(1.0, DELTA) == 0.0
    # the interior maximum sits at 1/2 and the barrier pushes values
    # outside [0, 1] back up
    assert double_well(0.5, DELTA) == pytest.approx(450.0 / 256.0)
    assert double_well(-0.02, DELTA) > double_well(0.0, DELTA)


def test_double_well_blows_up_at_barrier_edge():
    with pytest.raises(DomainError):
        double_well(-DELTA, DELTA)
    with pytest.raises(DomainError):
        double_well(1.0 + DELTA, DELTA)


@given(st.floats(min_value=-DELTA + 1e-3, max_value=1.0 + DELTA - 1e-3))
@settings(max_examples=200, deadline=None)
def test_double_well_derivatives_match_fd(phi):
    # the barrier switches on one-sidedly at 0 and 1, so the potential is
    # only C^1 there; centered differences must not straddle those kinks
    h = 1e-6
    assume(min(abs(phi), abs(phi - 1.0)) > 1e-3)
    fd1 = (double_well(phi + h, DELTA) - double_well(phi - h, DELTA)) / (2 * h)
    assert double_well_d1(phi, DELTA) == pytest.approx(fd1, rel=2e-4, abs=2e-4)
    fd2 = (double_well_d1(phi + h, DELTA) - double_well_d1(phi - h, DELTA)) / (2 * h)
    assert double_well_d2(phi, DELTA) == pytest.approx(fd2, rel=2e-4, abs=2e-3)


# ---------------------------------------------------------------------------
# projection onto the Gibbs plane

def rng_states(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.05, 0.9, size=(n, 3))


def test_projection_idempotent_and_on_plane():
    for phi in rng_states(50):
        p1 = project(phi, PARAMS)
        assert np.sum(p1) == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(project(p1, PARAMS), p1, atol=1e-14)


def test_projection_fixes_plane_vectors():
    phi = np.array([0.2, 0.3, 0.5])
    assert np.allclose(project(phi, PARAMS), phi, atol=1e-15)


def test_projection_weighting_follows_surface_tensions():
    # with unequal sigma the correction is distributed inversely to sigma
    params = ModelParams(sigma=(1.0, 2.0, 4.0))
    phi = np.array([0.3, 0.3, 0.3])
    proj = project(phi, params)
    corr = proj - phi
    assert corr[0] == pytest.approx(2.0 * corr[1], rel=1e-12)
    assert corr[1] == pytest.approx(2.0 * corr[2], rel=1e-12)


# ---------------------------------------------------------------------------
# triple well and its derivatives

def test_triple_well_vanishes_at_vertices():
    for k in range(3):
        phi = np.zeros(3)
        phi[k] = 1.0
        assert triple_well(phi, PARAMS) == pytest.approx(0.0, abs=1e-15)


def plane_states(n, seed, jitter=0.02):
    """Random states near the unit-sum plane, clear of the barrier poles."""
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.1, 0.9, size=(n, 3))
    raw /= raw.sum(axis=1, keepdims=True)
    return raw + rng.uniform(-jitter, jitter, size=(n, 3))


def test_triple_well_gradient_against_fd():
    h = 1e-6
    worst = 0.0
    for phi in plane_states(100, seed=7):
        grad = triple_well_grad(phi, PARAMS)
        for k in range(3):
            ek = np.zeros(3)
            ek[k] = h
            fd = (triple_well(phi + ek, PARAMS) - triple_well(phi - ek, PARAMS)) / (2 * h)
            denom = max(abs(fd), 1.0)
            worst = max(worst, abs(grad[k] - fd) / denom)
    assert worst <= 1e-5


def test_triple_well_hessian_against_fd():
    h = 1e-5
    for phi in plane_states(20, seed=11):
        hess = triple_well_hess(phi, PARAMS)
        assert np.allclose(hess, hess.T, atol=1e-9)
        for k in range(3):
            ek = np.zeros(3)
            ek[k] = h
            fd = (triple_well_grad(phi + ek, PARAMS)
                  - triple_well_grad(phi - ek, PARAMS)) / (2 * h)
            assert np.allclose(hess[:, k], fd, rtol=5e-4, atol=5e-3)


# ---------------------------------------------------------------------------
# mixture coefficients

def test_mixtures_at_pure_phases():
    params = ModelParams(gamma=(1.0, 2.0, 5.0))
    delta = params.delta
    e1 = np.array([[1.0], [0.0], [0.0]])
    e3 = np.array([[0.0], [0.0], [1.0]])
    f1, c1, ct1, g1, d1 = mixtures(e1, params)
    f3, c3, ct3, g3, d3 = mixtures(e3, params)
    assert f1[0] == pytest.approx(1.0)
    assert f3[0] == pytest.approx(2.0 * delta)
    assert ct1[0] == pytest.approx(1.0 + delta)
    assert ct3[0] == pytest.approx(delta)
    assert d1[0] == pytest.approx(0.0, abs=1e-15)
    assert d3[0] == pytest.approx(params.d0 * (1.0 - 2.0 * delta) ** 2)
    # harmonic viscosity with the delta shift, straight from the definition
    inv = 1.0 / 1.0 + delta * (1.0 / 1.0 + 1.0 / 2.0 + 1.0 / 5.0)
    assert g1[0] == pytest.approx(1.0 / inv)


def test_mixture_viscosity_positive_everywhere():
    rng = np.random.default_rng(3)
    phi = rng.uniform(-0.02, 1.0, size=(3, 500))
    phi /= np.maximum(phi.sum(axis=0), 0.3)
    _, _, _, gam, dfr = mixtures(phi, PARAMS)
    assert np.all(gam > 0.0)
    assert np.all(dfr >= 0.0)


# ---------------------------------------------------------------------------
# reaction kernel

def test_reaction_q_peak_and_support():
    # largest where fluid 1 and solid meet in equal parts
    assert reaction_q(np.array([0.5, 0.0, 0.5])) == pytest.approx(30.0 / 16.0)
    assert reaction_q(np.array([1.0, 0.0, 0.0])) == 0.0
    assert reaction_q(np.array([0.0, 1.0, 0.0])) == 0.0


def test_reaction_kernel_integrates_to_interface_count():
    # across one equilibrium transition the kernel integrates to eps_bar,
    # which is what turns the bulk reaction density into a surface rate;
    # the tails decay like 1/(30 z^2), so the window error is ~2/(30 Z)
    eps = 0.03
    y = np.linspace(-2.0, 2.0, 80001)
    phi1 = equilibrium_profile(y / eps)
    phi = np.array([phi1, np.zeros_like(phi1), 1.0 - phi1])
    q = reaction_q(phi)
    integral = np.trapezoid(q, y)
    assert integral == pytest.approx(eps, rel=2e-3)


def test_rate_sign_convention():
    assert rate_r(0.5) == 0.0
    assert rate_r(0.6) == pytest.approx(0.1)
    assert rate_r(0.0) == pytest.approx(-0.5)


def test_reaction_R_direction():
    phi = np.array([0.5, 0.0, 0.5])
    # oversaturated, no potential feedback: fluid 1 is consumed
    r_prec = reaction_R(phi, 0.6, 0.0, 0.0, ModelParams(alpha=0.0, delta=0.0))
    assert r_prec < 0.0
    # undersaturated: solid dissolves, fluid 1 grows
    r_diss = reaction_R(phi, 0.4, 0.0, 0.0, ModelParams(alpha=0.0, delta=0.0))
    assert r_diss > 0.0
    # potential difference alone also drives the reaction
    r_mu = reaction_R(phi, 0.5, 1.0, 0.0, ModelParams(alpha=0.1, delta=0.0))
    assert r_mu < 0.0


# ---------------------------------------------------------------------------
# equilibrium profile

def test_equilibrium_profile_shape():
    z = np.linspace(-40.0, 40.0, 4001)
    phi = equilibrium_profile(z)
    assert equilibrium_profile(0.0) == pytest.approx(0.5, abs=1e-12)
    assert np.all(np.diff(phi) >= 0.0)
    assert np.allclose(phi + equilibrium_profile(-z), 1.0, atol=1e-10)
    assert phi[0] < 0.02 and phi[-1] > 0.98


def test_equilibrium_profile_solves_the_profile_ode():
    z = np.linspace(-3.0, 3.0, 601)
    phi = equilibrium_profile(z)
    dz = z[1] - z[0]
    dphi = np.gradient(phi, dz)
    target = 30.0 * phi**2 * (1.0 - phi) ** 2
    core = (phi > 0.05) & (phi < 0.95)
    assert np.allclose(dphi[core], target[core], rtol=5e-3)


def test_profile_inverse_round_trip():
    z = np.linspace(-8.0, 8.0, 161)
    assert np.allclose(profile_z(equilibrium_profile(z)), z, atol=1e-9)


def test_profile_tails_are_algebraic():
    # far field approaches the pure phases like 1/(30 z), not exponentially
    for z in (50.0, 200.0, 1000.0):
        tail = 1.0 - equilibrium_profile(z)
        assert tail == pytest.approx(1.0 / (30.0 * z), rel=0.05)
