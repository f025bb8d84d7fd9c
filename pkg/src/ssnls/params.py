"""Model parameters for the focusing mass-supercritical NLS i u_t + Du + u|u|^{p-1} = 0.

The scaling-critical Sobolev index of the power nonlinearity is
s_c = d/2 - 2/(p-1); the regime of interest here is 0 < s_c < min(1, d/2),
with a deformation rate b > 0 and a working regularity sigma strictly
between s_c and min(1, d/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    """Frozen bundle of model constants; build via :func:`derive_params`."""

    d: int
    p: float
    b: float
    sigma: float
    s_c: float
    p_c: float
    alpha_c: float

    @property
    def two_over_pm1(self) -> float:
        # identity 2/(p-1) == d/2 - s_c is relied on throughout
        return 2.0 / (self.p - 1.0)


def derive_params(d: int, p: float, b: float, sigma: float) -> ModelParams:
    """Validate (d, p, b, sigma) and derive the critical exponents.

    s_c      = d/2 - 2/(p-1)            (critical Sobolev index)
    p_c      = 2d/(d - 2 s_c)           (critical Lebesgue exponent)
    alpha_c  = d(1/2 - 1/(p+1))         (also = d/(d+2-2 s_c))

    Raises ValueError whenever the supercritical window 0 < s_c < min(1, d/2)
    or sigma in (s_c, min(1, d/2)) is violated, or b <= 0.
    """
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"dimension d must be a positive integer, got {d!r}")
    if not (p > 1.0) or not math.isfinite(p):
        raise ValueError(f"nonlinearity power p must be finite and > 1, got {p!r}")
    if not (b > 0.0) or not math.isfinite(b):
        raise ValueError(f"deformation rate b must be finite and > 0, got {b!r}")

    s_c = d / 2.0 - 2.0 / (p - 1.0)
    cap = min(1.0, d / 2.0)
    if not (0.0 < s_c < cap):
        raise ValueError(
            f"critical index s_c={s_c:.6g} outside (0, {cap:.6g}); "
            f"(d={d}, p={p}) is not in the supported supercritical window"
        )
    if not (s_c < sigma < cap):
        raise ValueError(
            f"working regularity sigma={sigma!r} must lie in (s_c, {cap:.6g}) "
            f"= ({s_c:.6g}, {cap:.6g})"
        )

    p_c = 2.0 * d / (d - 2.0 * s_c)
    alpha_c = d * (0.5 - 1.0 / (p + 1.0))
    # equivalent form of alpha_c; keep as an internal consistency guard
    assert abs(alpha_c - d / (d + 2.0 - 2.0 * s_c)) < 1e-12
    assert s_c < alpha_c < 1.0

    return ModelParams(d=d, p=float(p), b=float(b), sigma=float(sigma),
                       s_c=s_c, p_c=p_c, alpha_c=alpha_c)
