"""Profile shooting: sech oracle, events, objective behavior, invariants."""

import dataclasses
import math

import numpy as np
import pytest

from ssnls.params import ModelParams, derive_params
from ssnls.profile import (
    Profile,
    far_field_slope,
    find_profile,
    integrate_profile,
    load_profile,
    potentials_from_profile,
    profile_residual,
    profile_rhs,
    save_profile,
    shooting_objective,
)
from tests.conftest import BRACKET_D1P7, BRACKET_D3P3


def _raw_params(d, p, b=1.0):
    # bypasses the s_c window validation for test-only parameter sets
    return ModelParams(d=d, p=float(p), b=b, sigma=0.75, s_c=0.0,
                       p_c=2.0, alpha_c=0.5)


def test_rhs_flat_balance():
    # -Q + Q|Q|^2 cancels at |Q| = 1 with b = 0
    pa = _raw_params(1, 3)
    assert profile_rhs(1.0, 1.0 + 0j, 0.0j, pa, b=0.0) == 0.0


def test_rhs_is_nonlinear():
    pa = _raw_params(1, 3)
    one = profile_rhs(1.0, 0.7 + 0.1j, 0.2j, pa, b=0.5)
    two = profile_rhs(1.0, 1.4 + 0.2j, 0.4j, pa, b=0.5)
    assert abs(two - 2.0 * one) > 1e-3


def test_rhs_center_series():
    pa = _raw_params(1, 3)
    v0 = profile_rhs(0.0, 1.2 + 0j, 0.0j, pa, b=0.5)
    v1 = profile_rhs(1e-6, 1.2 + 0j, v0 * 1e-6, pa, b=0.5)
    assert abs(v1 - v0) < 1e-8


def test_sech_ground_state():
    """b = 0, d = 1, p = 3 closed form sqrt(2) sech(r)."""
    pa = _raw_params(1, 3)
    r = np.linspace(1e-6, 12.0, 2001)
    traj = integrate_profile(math.sqrt(2.0), 0.0, pa, 12.0, r_eval=r,
                             rtol=1e-12, atol=1e-14, floor_frac=1e-6)
    assert traj.status == "complete"
    assert np.max(np.abs(traj.Q - math.sqrt(2.0) / np.cosh(r))) < 1e-6


def test_collapse_event():
    # overshoot of the d=3 cubic ground state crosses zero
    pa = _raw_params(3, 3)
    traj = integrate_profile(4.6, 0.0, pa, 20.0,
                             r_eval=np.linspace(1e-6, 20.0, 4001))
    assert traj.status == "vanished"
    assert traj.r[-1] < 20.0


def test_blowup_event():
    # 2/(p-1) - d > 0 makes the chirped branch grow algebraically
    pa = _raw_params(1, 1.5)
    traj = integrate_profile(1.0, 1.0, pa, 200.0)
    assert traj.status == "blowup"
    assert traj.r[-1] < 200.0


def test_objective_needs_chirp_periods():
    pa = derive_params(1, 7.0, 0.7, 0.25)
    with pytest.raises(ValueError):
        shooting_objective(0.92, 0.7, pa, (30.0, 31.0))
    with pytest.raises(ValueError):
        shooting_objective(0.92, 0.7, pa, (31.0, 30.0))


def _newton_window(bracket):
    r_m = math.sqrt(200.0 * np.pi / bracket[1][0])
    return (0.8 * r_m, r_m)


def test_objective_self_consistency(profile_d1p7):
    prof = profile_d1p7
    win = _newton_window(BRACKET_D1P7)
    obj = shooting_objective(prof.Q0, prof.b_star, prof.params, win)
    q_r1 = np.interp(win[0], prof.grid.r, np.abs(prof.Q))
    assert abs(obj) < 1e-6 * q_r1


def test_objective_sensitivity(profile_d1p7):
    prof = profile_d1p7
    win = _newton_window(BRACKET_D1P7)
    base = abs(shooting_objective(prof.Q0, prof.b_star, prof.params, win))
    bumped = abs(shooting_objective(prof.Q0, 1.01 * prof.b_star,
                                    prof.params, win))
    assert bumped > 10.0 * max(base, 1e-8)


def test_objective_continuity(profile_d1p7):
    """Finite-difference slope in b stable under step halving (10%)."""
    prof = profile_d1p7
    win = _newton_window(BRACKET_D1P7)
    b0 = 1.005 * prof.b_star          # probe off the zero, slope is O(1)

    def g(b):
        return shooting_objective(prof.Q0, b, prof.params, win)

    h = 2e-4
    s1 = (g(b0 + h) - g(b0 - h)) / (2.0 * h)
    s2 = (g(b0 + h / 2) - g(b0 - h / 2)) / h
    assert abs(s1 - s2) < 0.1 * abs(s2)


def test_profile_d1p7_invariants(profile_d1p7):
    prof = profile_d1p7
    assert prof.b_star > 0.0
    assert np.min(np.abs(prof.Q)) > 0.0
    assert prof.flatness < 0.01
    assert prof.Q.imag[0] == 0.0 and prof.Q.real[0] == prof.Q0
    assert np.isfinite(prof.qp_decay)
    slope = far_field_slope(prof)
    a = 2.0 / (prof.params.p - 1.0)
    assert abs(slope + a) < 0.02 * a
    assert profile_residual(prof) < 1e-6 * np.max(np.abs(prof.Q))
    # regression against the recorded ground-branch root
    assert abs(prof.Q0 - 0.919263317903) < 1e-5
    assert abs(prof.b_star - 0.706600985128) < 1e-5


def test_profile_d3p3():
    params = derive_params(3, 3.0, 0.9, 0.6)
    prof = find_profile(params, BRACKET_D3P3)
    assert np.min(np.abs(prof.Q)) > 0.0
    assert prof.flatness < 0.01
    assert abs(far_field_slope(prof) + 1.0) < 0.02
    assert profile_residual(prof) < 1e-6 * np.max(np.abs(prof.Q))
    assert abs(prof.Q0 - 1.885656979619) < 1e-5
    assert abs(prof.b_star - 0.917356147401) < 1e-5


def test_root_stable_under_tolerance(profile_d1p7):
    prof2 = find_profile(profile_d1p7.params, BRACKET_D1P7, rtol=5e-11)
    assert abs(prof2.Q0 - profile_d1p7.Q0) < 1e-6 * profile_d1p7.Q0
    assert abs(prof2.b_star - profile_d1p7.b_star) < 1e-6 * profile_d1p7.b_star


def test_phase_gauge_equivariance(profile_d1p7):
    z = np.exp(0.77j)
    rot = dataclasses.replace(profile_d1p7, Q=z * profile_d1p7.Q,
                              Qprime=z * profile_d1p7.Qprime)
    assert profile_residual(rot) < 1e-6 * np.max(np.abs(rot.Q))


def test_zero_field_degenerate_guard(profile_d1p7):
    zero = dataclasses.replace(profile_d1p7,
                               Q=np.zeros_like(profile_d1p7.Q),
                               Qprime=np.zeros_like(profile_d1p7.Qprime))
    assert profile_residual(zero) == 0.0
    assert not np.min(np.abs(zero.Q)) > 0.0     # rejected upstream


def test_potentials(profile_d1p7):
    prof = profile_d1p7
    W1, W2 = potentials_from_profile(prof)
    assert np.all(W1.values.imag == 0.0)
    assert np.all(W1.values.real > 0.0)
    assert np.all(np.abs(W2.values) <= W1.values.real + 1e-15)
    p = prof.params.p
    outer = prof.grid.r >= prof.grid.r_max / 10.0
    plateau = prof.grid.r[outer] ** 2 * W1.values.real[outer]
    target = 0.5 * (p + 1.0) * prof.c_p ** (p - 1.0)
    assert np.max(np.abs(plateau - target)) < 0.05 * target


def test_save_load_roundtrip(profile_d1p7, tmp_path):
    path = str(tmp_path / "prof.txt")
    save_profile(profile_d1p7, path)
    back = load_profile(path)
    assert np.array_equal(back.Q, profile_d1p7.Q)
    assert np.array_equal(back.Qprime, profile_d1p7.Qprime)
    assert back.b_star == profile_d1p7.b_star
    assert back.Q0 == profile_d1p7.Q0
    assert back.c_p == profile_d1p7.c_p
    assert back.flatness == profile_d1p7.flatness
    assert back.qp_decay == profile_d1p7.qp_decay
    assert back.params == profile_d1p7.params
    assert back.grid.N == profile_d1p7.grid.N


def test_nonconvergence_dumps_landscape():
    params = derive_params(1, 7.0, 0.7, 0.25)
    with pytest.raises(RuntimeError, match="landscape"):
        find_profile(params, ((1.30, 1.40), (0.90, 1.00)), max_iter=3)
