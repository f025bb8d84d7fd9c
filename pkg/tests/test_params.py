import math

import pytest

from ssnls import derive_params


def test_d1_p7_exponents():
    mp = derive_params(1, 7.0, b=0.5, sigma=0.3)
    assert mp.s_c == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert mp.p_c == pytest.approx(3.0, abs=1e-14)
    assert mp.alpha_c == pytest.approx(3.0 / 8.0, abs=1e-15)
    assert mp.two_over_pm1 == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_d3_p3_exponents():
    mp = derive_params(3, 3.0, b=0.2, sigma=0.8)
    assert mp.s_c == pytest.approx(0.5, abs=1e-15)
    assert mp.p_c == pytest.approx(3.0, abs=1e-14)


@pytest.mark.parametrize("d,p", [(1, 7.0), (1, 9.0), (2, 4.0), (3, 3.0),
                                 (3, 4.0), (2, 5.0), (4, 2.6)])
def test_exponent_identities(d, p):
    s_c = d / 2.0 - 2.0 / (p - 1.0)
    sigma = 0.5 * (s_c + min(1.0, d / 2.0))
    mp = derive_params(d, p, b=1.0, sigma=sigma)
    # 2/(p-1) = d/2 - s_c and the two alpha_c forms agree
    assert mp.two_over_pm1 == pytest.approx(d / 2.0 - mp.s_c, rel=1e-14)
    assert mp.alpha_c == pytest.approx(d / (d + 2.0 - 2.0 * mp.s_c), rel=1e-14)
    assert mp.s_c < mp.alpha_c < 1.0
    assert mp.p_c == pytest.approx(2.0 * d / (d - 2.0 * mp.s_c), rel=1e-14)


@pytest.mark.parametrize("d,p", [(1, 5.0),   # s_c = 0: mass-critical
                                 (1, 3.0),   # s_c < 0
                                 (3, 7.0),   # s_c = 1/2 + ... > 1 for d=3? -> 3/2-1/3>1
                                 (2, 2.0)])  # s_c = 0 for d=2... -> 1-2 = -1
def test_rejects_out_of_window(d, p):
    with pytest.raises(ValueError):
        derive_params(d, p, b=1.0, sigma=0.5)


def test_rejects_bad_rate_and_sigma():
    with pytest.raises(ValueError):
        derive_params(1, 7.0, b=0.0, sigma=0.3)
    with pytest.raises(ValueError):
        derive_params(1, 7.0, b=-1.0, sigma=0.3)
    with pytest.raises(ValueError):
        derive_params(1, 7.0, b=math.inf, sigma=0.3)
    # sigma must sit strictly between s_c = 1/6 and 1/2
    with pytest.raises(ValueError):
        derive_params(1, 7.0, b=1.0, sigma=1.0 / 6.0)
    with pytest.raises(ValueError):
        derive_params(1, 7.0, b=1.0, sigma=0.5)
    with pytest.raises(ValueError):
        derive_params(1, 7.0, b=1.0, sigma=0.05)


def test_rejects_bad_dimension_and_power():
    with pytest.raises(ValueError):
        derive_params(0, 7.0, b=1.0, sigma=0.3)
    with pytest.raises(ValueError):
        derive_params(1.0, 7.0, b=1.0, sigma=0.3)  # d must be an int
    with pytest.raises(ValueError):
        derive_params(1, 1.0, b=1.0, sigma=0.3)
    with pytest.raises(ValueError):
        derive_params(1, math.inf, b=1.0, sigma=0.3)


def test_frozen_bundle_is_immutable():
    mp = derive_params(1, 7.0, b=0.5, sigma=0.3)
    with pytest.raises(Exception):
        mp.b = 1.0
