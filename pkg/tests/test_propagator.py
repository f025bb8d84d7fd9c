"""Deformed-group checks: closed forms, the rescaling identity, the group
law, kernel bounds, and space-time integrability."""

import math

import numpy as np
import pytest

from ssnls import Field, Grid1D, Lp, norm
from ssnls.propagator import (FrequencyOverflowError, PropagatorPlan,
                              admissible, dispersive_norm_L1_Linf,
                              free_schrodinger, propagate,
                              propagate_via_rescaling, strichartz_sample)

B = 1.0
K0 = 0.7


@pytest.fixture(scope="module")
def grid():
    return Grid1D(1024, 24.0)


@pytest.fixture(scope="module")
def u0(grid):
    return Field(np.exp(-grid.x ** 2 / 2) * np.exp(1j * K0 * grid.x), grid)


@pytest.fixture(scope="module")
def plan(grid):
    return PropagatorPlan(grid, B, oversample=4)


def exact_evolution(grid, t):
    # modulated Gaussian under the deformed group, frequency side:
    # uhat0(xi) = sqrt(2 pi) e^{-(xi-k0)^2/2}, then dilate + chirp + e^{bt/2}
    s = math.exp(B * t)
    xi = grid.xi
    uhat = (math.exp(0.5 * B * t) * np.sqrt(2 * np.pi)
            * np.exp(-(s * xi - K0) ** 2 / 2)
            * np.exp(-1j * ((s * s - 1) / (2 * B)) * xi ** 2))
    return grid.from_freq(uhat)


def rel_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 1.3])
def test_matches_closed_form(plan, u0, grid, t):
    v = plan.apply(u0, t)
    assert rel_l2(v.values, exact_evolution(grid, t)) < 1e-10


@pytest.mark.parametrize("tau", [0.2, 0.7, 1.0])
def test_rescaling_identity(plan, u0, tau):
    # independent route: free evolution + pointwise contraction resample
    v1 = plan.apply(u0, tau)
    v2 = propagate_via_rescaling(u0, tau, B)
    assert rel_l2(v1.values, v2.values) < 1e-8


def test_group_law(plan, u0):
    v_comp = plan.apply(plan.apply(u0, 0.45), 0.75)
    v_sum = plan.apply(u0, 1.2)
    assert rel_l2(v_comp.values, v_sum.values) < 1e-9


def test_identity_and_inverse(plan, u0):
    assert np.array_equal(plan.apply(u0, 0.0).values, u0.values)
    back = plan.apply(plan.apply(u0, 0.8), -0.8)
    assert np.max(np.abs(back.values - u0.values)) < 1e-9


def test_l2_unitarity(plan, u0):
    drift = abs(norm(plan.apply(u0, 1.0), Lp(2)) - norm(u0, Lp(2)))
    assert drift < 1e-10


def test_scale_budget_enforced(plan, u0):
    with pytest.raises(FrequencyOverflowError):
        plan.apply(u0, math.log(4.0) / B + 0.05)


def test_plan_validation(grid, u0):
    with pytest.raises(ValueError):
        PropagatorPlan(grid, 0.0)
    with pytest.raises(ValueError):
        PropagatorPlan(grid, 1.0, oversample=3)
    other = Grid1D(512, 24.0)
    with pytest.raises(ValueError):
        PropagatorPlan(other, 1.0).apply(u0, 0.1)
    with pytest.raises(ValueError):
        propagate(u0, 0.1)  # needs b or a plan


def test_free_propagator_closed_form(grid):
    # e^{i t Lap} e^{-x^2/2} = (1 + 2 i t)^{-1/2} e^{-x^2 / (2 (1 + 2 i t))}
    t = 0.8
    f = Field(np.exp(-grid.x ** 2 / 2) + 0j, grid)
    w = free_schrodinger(f, t)
    sig = 1 + 2j * t
    exact = sig ** -0.5 * np.exp(-grid.x ** 2 / (2 * sig))
    assert np.max(np.abs(w.values - exact)) < 1e-12


# ---------------------------------------------------------------------------
# kernel bound

def test_kernel_value():
    # (4 pi sinh 1)^{-1/2}
    assert dispersive_norm_L1_Linf(1.0, 1.0, 1) == pytest.approx(
        0.26021897151801915, rel=1e-14)


def test_kernel_free_limit():
    a = dispersive_norm_L1_Linf(0.5, 1e-9, 1)
    b = dispersive_norm_L1_Linf(0.5, 0.0, 1)
    assert b == pytest.approx((4 * np.pi * 0.5) ** -0.5, rel=1e-14)
    assert a == pytest.approx(b, rel=1e-9)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_kernel_log_slope(d):
    # exponential improvement over the free bound: slope -> -d b / 2
    b = 0.7
    s = (math.log(dispersive_norm_L1_Linf(21.0, b, d))
         - math.log(dispersive_norm_L1_Linf(20.0, b, d)))
    assert s == pytest.approx(-d * b / 2, abs=1e-9)


def test_kernel_rejects_t0():
    with pytest.raises(ValueError):
        dispersive_norm_L1_Linf(0.0, 1.0, 1)


# ---------------------------------------------------------------------------
# admissible exponents

@pytest.mark.parametrize("q,p,d,ok", [
    (np.inf, 2.0, 1, True),    # conserved endpoint
    (2.0, np.inf, 1, False),   # excluded endpoint
    (4.0, np.inf, 1, True),    # 2/q = 1/2 = d/2 boundary
    (2.0, 4.0, 1, True),
    (6.0, 6.0, 1, True),
    (6.0, 6.0, 2, False),      # below the d=2 scaling line
    (np.inf, 3.0, 2, False),
    (2.0, 6.0, 3, True),       # d=3 endpoint line
    (2.0, 6.5, 3, False),
    (1.5, 8.0, 1, False),      # q < 2
    (4.0, 2.0, 1, False),      # p must exceed 2 away from (inf, 2)
])
def test_admissible_region(q, p, d, ok):
    assert admissible(q, p, d) is ok


# ---------------------------------------------------------------------------
# space-time norms

def test_strichartz_saturates_for_positive_b(u0):
    st = strichartz_sample(u0, 4.0, 4.0, b=1.0, T=160.0)
    assert st.saturated
    st2 = strichartz_sample(u0, 4.0, 4.0, b=1.0, T=320.0)
    assert st2.value == pytest.approx(st.value, rel=1e-3)
    assert np.all(np.diff(st.running) >= 0)


def test_strichartz_sup_norm_route(u0):
    st = strichartz_sample(u0, np.inf, 2.0, b=1.0, T=30.0)
    # L2 is conserved by the group, so the running sup is the data norm
    assert st.value == pytest.approx(norm(u0, Lp(2)), rel=1e-12)
    assert st.saturated


def test_strichartz_grows_without_deformation():
    # (q, p) = (2, 4), d = 1: the free integrand decays like t^{-1/2} only,
    # so the integral grows ~ sqrt(T) and must not report saturation
    g = Grid1D(4096, 640.0)
    v = Field(np.exp(-g.x ** 2 / 2) + 0j, g)
    half = strichartz_sample(v, 2.0, 4.0, b=0.0, T=25.0)
    full = strichartz_sample(v, 2.0, 4.0, b=0.0, T=50.0)
    assert not full.saturated
    assert full.value > 1.3 * half.value


def test_strichartz_validation(u0):
    with pytest.raises(ValueError):
        strichartz_sample(u0, 4.0, 4.0, b=1.0, T=0.0)
    with pytest.raises(ValueError):
        strichartz_sample(u0, 4.0, 4.0, b=1.0, T=10.0, n_t=4)
