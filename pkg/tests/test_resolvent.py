"""Ray resolvent: ODE residuals, dual-route agreement, identities, decay laws."""

import numpy as np
import pytest

from ssnls import Field, Grid1D
from ssnls.propagator import PropagatorPlan
from ssnls.resolvent import (
    ResolventPlan,
    _ray_metric,
    apply_delta_b,
    inversion_residual,
    lambda_decay_scan,
    resolvent_identity_residual,
    resolvent_to_field,
    resolvent_via_time_integral,
    sigma_shift_check,
)

B = 1.0


@pytest.fixture(scope="module")
def grid():
    return Grid1D(1024, 24.0)


@pytest.fixture(scope="module")
def data(grid):
    # cos(4x) modulation keeps the spectrum dead at the origin (needed by the
    # fractional-shift check) and inside the decay cap of the box
    return Field(np.exp(-grid.x ** 2 / 2.0) * np.cos(4.0 * grid.x) + 0j, grid)


@pytest.fixture(scope="module")
def plan(data):
    return ResolventPlan(data, B)


def test_apply_delta_b_gaussian(grid):
    """Closed form of (Lap + ib(1/2 + x d/dx)) e^{-x^2/2}."""
    f = Field(np.exp(-grid.x ** 2 / 2.0) + 0j, grid)
    got = apply_delta_b(f, B).values
    exact = ((grid.x ** 2 - 1.0) + 1j * B * (0.5 - grid.x ** 2)) \
        * np.exp(-grid.x ** 2 / 2.0)
    assert np.max(np.abs(got - exact)) < 5e-12


def test_group_generator(data):
    # d/dt e^{it Delta_b} u |_{t=0} = i Delta_b u, centered difference
    pp = PropagatorPlan(data.grid, B)
    h = 1e-5
    fd = (pp.apply(data, h).values - pp.apply(data, -h).values) / (2.0 * h)
    gen = 1j * apply_delta_b(data, B).values
    assert np.max(np.abs(fd - gen)) / np.max(np.abs(gen)) < 1e-6


@pytest.mark.parametrize("z, branch", [
    (0.8 + 0.25j, "+"),
    (0.8 + 0.25j, "-"),
    (0.8 - 0.25j, "-"),
    (2.0 + 0.4j, "+"),
])
def test_ray_ode_residual(data, z, branch):
    """ib r R' + (r^2 + ib/2 - z) R = fhat, order-8 stencil on a fine ray."""
    assert inversion_residual(data, z, B, branch, r_lo=0.4) < 1e-9


def test_uniform_transform_matches_dense(plan):
    r = 0.37 + 0.013 * np.arange(400)
    dense = plan.ft(r)
    fast = plan.ft.uniform(0.37, 0.013, 400)
    assert np.max(np.abs(dense - fast)) < 1e-11 * np.max(np.abs(dense))


def test_even_data_is_ray_symmetric(plan):
    r = np.geomspace(0.3, plan.rho_cap * 0.9, 120)
    a = plan.apply(0.8 + 0.25j, "+", r, sign=+1).values
    b = plan.apply(0.8 + 0.25j, "+", r, sign=-1).values
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(a))


@pytest.mark.parametrize("z, branch", [
    (0.8 + 0.25j, "+"),
    (0.8 - 0.25j, "-"),
])
def test_time_integral_oracle(data, plan, z, branch):
    """Filon ray quadrature vs the propagator time integral: independent
    discretizations of the same contour, so agreement validates both."""
    r = np.geomspace(0.3, plan.rho_cap * 0.9, 160)
    direct = plan.apply(z, branch, r).values
    oracle = resolvent_via_time_integral(data, z, B, branch, r).values
    rel = _ray_metric(r, direct - oracle) / _ray_metric(r, direct)
    assert rel < 1e-6


def test_identity_same_point(data):
    assert resolvent_identity_residual(data, 0.8 + 0.25j, 0.8 + 0.25j,
                                       B, "+", "+") == 0.0


@pytest.mark.parametrize("z, w, bz, bw, tol", [
    (0.8 + 0.3j, 1.4 + 0.2j, "+", "+", 1e-7),
    (0.8 - 0.3j, 1.4 - 0.2j, "-", "-", 1e-5),   # head-series floor
    (0.6 + 0.2j, 0.6 - 0.2j, "+", "-", 1e-7),
])
def test_first_resolvent_identity(data, z, w, bz, bw, tol):
    """R(z) - R(w) = (z - w) R(z) R(w), composed through the ray integrals."""
    assert resolvent_identity_residual(data, z, w, B, bz, bw) < tol


def test_mixed_identity_rejects_wrong_order(data):
    with pytest.raises(ValueError):
        resolvent_identity_residual(data, 0.6 - 0.2j, 0.6 + 0.2j, B, "-", "+")
    with pytest.raises(ValueError):
        # tail of the outer integral only converges for Im z > Im w
        resolvent_identity_residual(data, 0.6 - 0.2j, 0.6 + 0.2j, B, "+", "-")


def test_fractional_shift_intertwining(data):
    """D^s R(z) D^{-s} = R(z + ibs) up to the grid multiplier error."""
    assert sigma_shift_check(data, 0.8 + 0.2j, B, 0.3) < 2e-4


def test_grid_inversion_interior(data):
    # periodized reconstruction of a slowly decaying tail; interior window
    R = resolvent_to_field(data, 0.8 + 0.25j, B, "+")
    lhs = -apply_delta_b(R, B).values - (0.8 + 0.25j) * R.values
    g = data.grid
    mask = np.abs(g.x) < 0.7 * g.L
    rel = np.linalg.norm((lhs - data.values)[mask]) \
        / np.linalg.norm(data.values[mask])
    assert rel < 1e-2


def test_high_energy_decay_slopes():
    """|| R(lam + iy) f || ~ lam^{-1} and the boundary jump ~ lam^{-2} once
    lam clears the square of the data's spectral radius."""
    g = Grid1D(512, 24.0)
    f = Field(np.exp(-g.x ** 2 / 18.0) + 0j, g)
    scan = lambda_decay_scan(f, B, lam=np.geomspace(10.0, 100.0, 4))
    assert abs(scan["slope_single"] + 1.0) < 0.3
    assert abs(scan["slope_jump"] + 2.0) < 0.4
    assert np.all(np.diff(scan["single"]) < 0)
    assert np.all(np.diff(scan["jump"]) < 0)


def test_lower_branch_strip(data, plan):
    r = np.geomspace(0.3, 2.0, 32)
    with pytest.raises(ValueError):
        plan.apply(0.8 + 0.5j, "-", r)         # Im z >= b d / 2
    with pytest.raises(ValueError):
        resolvent_via_time_integral(data, 0.8 + 0.5j, B, "-", r)


def test_apply_validations(data, plan):
    r = np.geomspace(0.3, 2.0, 32)
    with pytest.raises(ValueError):
        plan.apply(0.8 + 0.2j, "x", r)
    with pytest.raises(ValueError):
        plan.apply(0.8 + 0.2j, "+", r[::-1])
    with pytest.raises(ValueError):
        plan.apply(0.8 + 0.2j, "+", r, sign=2)
    with pytest.raises(ValueError):
        ResolventPlan(data, 0.0)
    with pytest.raises(ValueError):
        ResolventPlan(data, B, d=3)
