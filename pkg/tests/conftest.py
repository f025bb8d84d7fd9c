import pytest

from ssnls.params import derive_params
from ssnls.profile import find_profile

# ground-branch shooting brackets located by coarse (Q0, b) scans; the
# converged roots sit near (0.9193, 0.7066) and (1.8857, 0.9174)
BRACKET_D1P7 = ((0.84, 1.00), (0.60, 0.80))
BRACKET_D3P3 = ((1.80, 2.00), (0.85, 1.00))


@pytest.fixture(scope="session")
def profile_d1p7():
    params = derive_params(1, 7.0, 0.7, 0.25)
    return find_profile(params, BRACKET_D1P7)
