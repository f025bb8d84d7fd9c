"""Resolvent of the deformed Laplacian on the frequency ray.

With A = -(Lap + i b (d/2 + x.grad)), the transformed equation (A - z) R = f
is a first-order transport ODE along each frequency ray xi = s * rho
(s = +-1, rho > 0):

    i b rho dR/drho + (rho^2 + i b d/2 - z) R = fhat(s rho).

Integrating along the ray gives the two branches

    Rhat_pm(rho) = +- (i/b) rho^{-(d/2 + i z / b)} e^{i rho^2 / (2 b)} I_pm(rho),
    I_+(rho) = int_rho^inf  g,   I_-(rho) = int_0^rho g,
    g(t) = t^{d/2 - 1 + i z / b} e^{-i t^2 / (2 b)} fhat(s t),

distinguished by where the constant of integration is placed; "+" decays in
the upper spectral half plane and "-" in the lower one.  The oscillatory
integrals are evaluated by quadratic Filon panels: the smooth factor
t^nu fhat(s t) is fit by a parabola per panel and integrated against the
Fresnel kernel exactly through erf along the 45-degree ray.  Below the first
panel, I_- comes from a Taylor head built out of the exact transform moments
fhat^{(k)}(0) = dx sum_j u_j (-i x_j)^k.

A second, independent route computes the same object as a time integral of
the propagator group, (A - z)^{-1} = i int_0^inf e^{izt} e^{it Lap_b} dt
(lower branch with t -> -t), discretized by composite Gauss-Legendre panels
sized to the instantaneous chirp rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, roots_legendre

from .grids import Field, Grid1D
from .spectral import fractional_derivative

_HEAD_TERMS = 14


# ---------------------------------------------------------------------------
# transform evaluation at arbitrary ray nodes

class RayTransform:
    """Continuum transform of grid data, evaluated at arbitrary frequencies.

    Uses the exact trigonometric sum dx * sum u_j e^{-i rho x_j} (dense,
    chunked); values beyond the grid band |rho| > xi_max are clamped to zero,
    where the sum would alias instead of decaying.
    """

    def __init__(self, f: Field, eps_dec: float = 1e-13):
        if not isinstance(f.grid, Grid1D):
            raise TypeError("ray transform needs Grid1D data")
        self.grid = f.grid
        self.u = f.values
        self._xu = self.grid.dx * self.u
        spec = np.abs(np.fft.fftshift(self.grid.to_freq(f.values)))
        xi_s = np.fft.fftshift(self.grid.xi)
        peak = float(np.max(spec))
        alive = np.abs(xi_s)[spec > eps_dec * peak]
        self.rho_dec = float(np.max(alive)) if alive.size else self.grid.dxi
        self.rho_cap = min(self.rho_dec * 1.05, 0.98 * self.grid.xi_max)
        # effective support radius, sets the transform's oscillation scale
        amp = np.abs(f.values)
        live = np.abs(self.grid.x)[amp > 1e-10 * np.max(amp)]
        self.x_eff = max(float(np.max(live)) if live.size else 1.0, 1.0)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.zeros(rho.size, dtype=np.complex128)
        band = np.abs(rho) <= self.grid.xi_max
        idx = np.nonzero(band)[0]
        x = self.grid.x
        for k in range(0, idx.size, 2048):
            sl = idx[k:k + 2048]
            out[sl] = np.exp(-1j * np.outer(rho[sl], x)) @ self._xu
        return out

    def uniform(self, rho0: float, drho: float, m: int) -> np.ndarray:
        """Fast path for m nodes rho0 + k*drho via a chirp-z sum."""
        from scipy.signal import czt
        g = self.grid
        y = self._xu * np.exp(-1j * rho0 * g.x)
        k = np.arange(m)
        vals = np.exp(1j * k * drho * g.L) * czt(y, m=m, w=np.exp(-1j * drho * g.dx))
        band = np.abs(rho0 + k * drho) <= g.xi_max
        return np.where(band, vals, 0.0)

    def moments(self, n: int) -> np.ndarray:
        """fhat^{(k)}(0) for k = 0..n-1."""
        x = self.grid.x
        return np.array([np.sum(self._xu * (-1j * x) ** k) for k in range(n)])


def apply_delta_b(f: Field, b: float) -> Field:
    """(Lap + i b (d/2 + x d/dx)) f on the grid (d = 1), spectral derivatives."""
    grid = f.grid
    fhat = grid.to_freq(f.values)
    xi = grid.xi
    fxx = grid.from_freq(-xi ** 2 * fhat)
    fx = grid.from_freq(1j * xi * fhat)
    return Field(fxx + 1j * b * (0.5 * f.values + grid.x * fx), grid, "physical")


# ---------------------------------------------------------------------------
# Filon panels

def _fresnel_moments(a: float, lo: np.ndarray, hi: np.ndarray):
    """Exact int_lo^hi t^k e^{-i a t^2} dt for k = 0, 1, 2 (vectorized)."""
    c = 1j * a
    rc = math.sqrt(a) * np.exp(0.25j * np.pi)   # sqrt(c) on the stable ray
    pref = 0.5 * math.sqrt(math.pi) / rc
    M0 = pref * (erf(rc * hi) - erf(rc * lo))
    ex_lo, ex_hi = np.exp(-c * lo ** 2), np.exp(-c * hi ** 2)
    M1 = (ex_lo - ex_hi) / (2.0 * c)
    M2 = (lo * ex_lo - hi * ex_hi) / (2.0 * c) + M0 / (2.0 * c)
    return M0, M1, M2


def _filon_panels(smooth, a: float, edges: np.ndarray) -> np.ndarray:
    """Per-panel integrals of smooth(t) e^{-i a t^2} on consecutive edges."""
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    delta = 0.5 * (hi - lo)
    allv = smooth(np.concatenate([lo, mid, hi]))
    n = lo.size
    w0, wm, w1 = allv[:n], allv[n:2 * n], allv[2 * n:]
    beta = (w1 - w0) / (2.0 * delta)
    gamma = (w1 - 2.0 * wm + w0) / (2.0 * delta ** 2)
    if a == 0.0:
        h = hi - lo
        return wm * h + gamma * (h ** 3) / 12.0
    M0, M1, M2 = _fresnel_moments(a, lo, hi)
    M1c = M1 - mid * M0
    M2c = M2 - 2.0 * mid * M1 + mid ** 2 * M0
    return wm * M0 + beta * M1c + gamma * M2c


def _panel_edges(r_lo: float, r_hi: float, width_fn, nodes=None) -> np.ndarray:
    """Edge set covering [r_lo, r_hi]: the given nodes plus subdivisions that
    respect the local width cap."""
    pts = [r_lo, r_hi] if nodes is None else \
        [r_lo] + [float(r) for r in nodes if r_lo < r < r_hi] + [r_hi]
    pts = np.unique(np.asarray(pts, dtype=float))
    out = [pts[0]]
    for p0, p1 in zip(pts[:-1], pts[1:]):
        w = min(width_fn(p0), width_fn(p1))
        k = max(int(math.ceil((p1 - p0) / w)), 1)
        out.extend(np.linspace(p0, p1, k + 1)[1:])
    return np.asarray(out)


# ---------------------------------------------------------------------------
# main evaluator

@dataclass
class RayFunction:
    """Samples of a frequency-side function on a signed ray xi = sign * r."""

    r: np.ndarray
    values: np.ndarray
    sign: int = +1


class ResolventPlan:
    """Shared machinery for resolvent evaluations on fixed data f and rate b."""

    def __init__(self, f: Field, b: float, d: int = 1, eta: float = np.pi / 16.0):
        if d != 1:
            raise ValueError("line geometry only (d = 1)")
        if not (b > 0.0) or not math.isfinite(b):
            raise ValueError(f"need b > 0, got {b}")
        self.f = f
        self.b = float(b)
        self.d = d
        self.eta = float(eta)
        self.ft = RayTransform(f)
        self._moments = self.ft.moments(_HEAD_TERMS)
        self.rho_cap = self.ft.rho_cap

    # -- panel width caps: Fresnel phase, log phase, power variation, data scale
    def _width_fn(self, z: complex):
        b, eta = self.b, self.eta
        # only the real part of nu drives amplitude variation; the imaginary
        # part is the log phase and gets its own cap
        re_nu = abs(self.d / 2.0 - 1.0 - z.imag / b)
        rez = abs(z.real)

        def width(rho: float) -> float:
            w = eta * b / max(rho, 1e-9)
            if rez > 1e-12:
                w = min(w, eta * b * rho / rez)
            w = min(w, 0.08 * rho / max(re_nu, 1.0), eta / self.ft.x_eff)
            return max(w, 1e-7)
        return width

    def _head_coeffs(self, z: complex, sign: int) -> np.ndarray:
        # series of g(t) = t^nu sum c_n t^n around 0
        c = 1j / (2.0 * self.b)
        cs = np.zeros(_HEAD_TERMS, dtype=np.complex128)
        for n in range(_HEAD_TERMS):
            acc = 0.0 + 0.0j
            for m in range(0, n // 2 + 1):
                k = n - 2 * m
                acc += (self._moments[k] * sign ** k / math.factorial(k)
                        * (-c) ** m / math.factorial(m))
            cs[n] = acc
        return cs

    def _head_integral(self, z: complex, sign: int, r: np.ndarray) -> np.ndarray:
        """I_-(r) for r below the panel region, by the Taylor head."""
        nu = self.d / 2.0 - 1.0 + 1j * z / self.b
        cs = self._head_coeffs(z, sign)
        out = np.zeros(r.size, dtype=np.complex128)
        for n, cn in enumerate(cs):
            out += cn * r ** (nu + n + 1) / (nu + n + 1)
        return out

    def _smooth_factor(self, z: complex, sign: int):
        nu = self.d / 2.0 - 1.0 + 1j * z / self.b

        def smooth(rho: np.ndarray) -> np.ndarray:
            return rho ** nu * self.ft(sign * rho)
        return smooth

    def minus_integral(self, z: complex, sign: int, r: np.ndarray) -> np.ndarray:
        """Cumulative I_-(r) = int_0^r g at the sorted nodes r."""
        if z.imag >= self.b * self.d / 2.0 - 1e-12:
            raise ValueError("I_- diverges at the origin for Im z >= b d / 2")
        r = np.asarray(r, dtype=float)
        r_head = min(0.4 / self.ft.x_eff, 0.5 * math.sqrt(self.b), 0.3)
        below = r <= r_head
        out = np.empty(r.size, dtype=np.complex128)
        out[below] = self._head_integral(z, sign, r[below])
        if not np.any(~below):
            return out
        body_nodes = r[~below]
        edges = _panel_edges(r_head, float(body_nodes[-1]),
                             self._width_fn(z), nodes=body_nodes)
        panels = _filon_panels(self._smooth_factor(z, sign),
                               1.0 / (2.0 * self.b), edges)
        cum = self._head_integral(z, sign, np.array([r_head]))[0] + \
            np.concatenate([[0.0], np.cumsum(panels)])
        idx = np.searchsorted(edges, body_nodes)
        out[~below] = cum[idx]
        return out

    def plus_integral(self, z: complex, sign: int, r: np.ndarray) -> np.ndarray:
        """I_+(r) = int_r^rho_cap g (the transform is dead beyond the cap)."""
        r = np.asarray(r, dtype=float)
        edges = _panel_edges(float(r[0]), max(self.rho_cap, float(r[-1])),
                             self._width_fn(z), nodes=r)
        panels = _filon_panels(self._smooth_factor(z, sign),
                               1.0 / (2.0 * self.b), edges)
        tail = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
        idx = np.searchsorted(edges, r)
        return tail[idx]

    def apply(self, z: complex, branch: str, r: np.ndarray,
              sign: int = +1) -> RayFunction:
        """Rhat_pm(sign * r) at the sorted positive nodes r."""
        z = complex(z)
        r = np.asarray(r, dtype=float)
        if r.ndim != 1 or r.size < 2 or np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise ValueError("nodes must be a sorted positive 1-d array")
        if sign not in (+1, -1):
            raise ValueError("sign selects the half-line: +1 or -1")
        b, d = self.b, self.d
        if branch == "+":
            I = self.plus_integral(z, sign, r)
            pref = 1j / b
        elif branch == "-":
            I = self.minus_integral(z, sign, r)
            pref = -1j / b
        else:
            raise ValueError(f"branch must be '+' or '-', got {branch!r}")
        vals = pref * r ** (-(d / 2.0 + 1j * z / b)) \
            * np.exp(1j * r ** 2 / (2.0 * b)) * I
        return RayFunction(r, vals, sign)


def resolvent_apply(f: Field, z: complex, b: float, branch: str = "+",
                    r_nodes: np.ndarray | None = None, sign: int = +1,
                    plan: ResolventPlan | None = None) -> RayFunction:
    """(A - z)^{-1} f on the frequency ray, A = -(Lap + i b (d/2 + x d/dx))."""
    if plan is None:
        plan = ResolventPlan(f, b)
    if r_nodes is None:
        r_nodes = np.geomspace(plan.ft.grid.dxi / 4.0, plan.rho_cap, 800)
    return plan.apply(z, branch, r_nodes, sign)


# ---------------------------------------------------------------------------
# checks

def _ray_metric(r: np.ndarray, vals: np.ndarray, d: int = 1) -> float:
    w = r ** (d - 1)
    return float(np.sqrt(np.trapezoid(w * np.abs(vals) ** 2, r)))


def inversion_residual(f: Field, z: complex, b: float, branch: str = "+",
                       r_lo: float = 0.5, r_hi: float | None = None,
                       n: int = 2048, sign: int = +1) -> float:
    """Relative ray-L2 residual of i b r R' + (r^2 + i b d/2 - z) R = fhat,
    with R' from an order-8 centered difference on a uniform ray grid."""
    plan = ResolventPlan(f, b)
    if r_hi is None:
        r_hi = plan.rho_cap
    # resolve the chirp scale r_hi / b with plenty of margin for the stencil
    h = min(2.0 * np.pi * b / r_hi / 24.0, (r_hi - r_lo) / n)
    r = np.arange(r_lo - 4 * h, r_hi + 4.5 * h, h)
    R = plan.apply(z, branch, r, sign).values
    cfd = np.array([1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0,
                    4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280])
    dR = np.zeros(r.size - 8, dtype=np.complex128)
    for j, c in enumerate(cfd):
        if c != 0.0:
            dR += c * R[j:j + dR.size]
    rc = r[4:-4]
    Rc = R[4:-4]
    lhs = 1j * b * rc * dR / h + (rc ** 2 + 0.5j * b * plan.d - z) * Rc
    rhs = plan.ft(sign * rc)
    return _ray_metric(rc, lhs - rhs) / _ray_metric(rc, rhs)


def resolvent_via_time_integral(f: Field, z: complex, b: float,
                                branch: str = "+", r_nodes: np.ndarray = None,
                                gl_points: int = 12, rate_budget: float = 5.0,
                                ) -> RayFunction:
    """Independent time-integral route on the ray (d = 1):

    "+":  R = i int_0^inf e^{i z t} (group at +t) dt   (dilated arguments,
          cut off once e^{bt} r crosses the transform's decay radius)
    "-":  R = -i int_0^inf e^{-i z t} (group at -t) dt (contracted arguments,
          cut off by amplitude decay e^{(Im z - b d/2) t})

    Composite Gauss-Legendre panels sized against the instantaneous phrase
    rate |z| + e^{+-2bt} r^2 + amplitude scale.
    """
    z = complex(z)
    plan = ResolventPlan(f, b)
    ft = plan.ft
    if r_nodes is None:
        r_nodes = np.linspace(ft.grid.dxi / 2.0, plan.rho_cap * 0.9, 200)
    r = np.asarray(r_nodes, dtype=float)
    d = plan.d
    cap = plan.rho_cap
    r_hi = float(r[-1])
    dr = r[1] - r[0]
    uniform = np.allclose(np.diff(r), dr, rtol=1e-12, atol=0.0)

    if branch == "+":
        T = math.log(cap / float(r[0])) / b + 1e-9
        sgn_t = +1.0
    elif branch == "-":
        margin = b * d / 2.0 - z.imag
        if margin <= 0.0:
            raise ValueError("lower time integral needs Im z < b d / 2")
        T = 32.0 / margin
        sgn_t = -1.0
    else:
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")

    def rate(t: float) -> float:
        reach = min(math.exp(sgn_t * b * t) * r_hi, cap)
        return abs(z) + b * d / 2.0 + reach ** 2 + b * (1.0 + ft.x_eff * reach)

    edges = [0.0]
    while edges[-1] < T:
        edges.append(min(edges[-1] + rate_budget / rate(edges[-1]), T))
    gx, gw = roots_legendre(gl_points)
    out = np.zeros(r.size, dtype=np.complex128)
    for t0, t1 in zip(edges[:-1], edges[1:]):
        tm, th = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
        for x, w in zip(gx, gw):
            t = tm + th * x
            s = math.exp(sgn_t * b * t)
            if uniform:
                fv = ft.uniform(s * r[0], s * dr, r.size)
            else:
                fv = ft(s * r)
            chirp = np.exp(-1j * ((s * s - 1.0) / (2.0 * b)) * r ** 2)
            phase = np.exp(1j * sgn_t * z * t) * s ** (0.5 * d)
            out += (w * th) * phase * fv * chirp
    return RayFunction(r, 1j * sgn_t * out, +1)


def resolvent_identity_residual(f: Field, z: complex, w: complex, b: float,
                                branch_z: str = "+", branch_w: str = "+",
                                r_lo: float = 0.5, r_hi: float | None = None,
                                n: int = 600) -> float:
    """Relative residual of R(z) - R(w) = (z - w) R(z) R(w) on the ray.

    The composition is evaluated through the phase-cancelled form: plugging
    the combined representation of R(w)f into the outer ray integral leaves
    the non-oscillatory integrand (+-i/b) t^{-1 + i(z - w)/b} I_w(t), so the
    outer quadrature needs no Fresnel kernel at all.
    """
    z, w = complex(z), complex(w)
    plan = ResolventPlan(f, b)
    if r_hi is None:
        r_hi = plan.rho_cap * 0.9
    r = np.geomspace(r_lo, r_hi, n)

    Rz = plan.apply(z, branch_z, r).values
    Rw = plan.apply(w, branch_w, r).values
    if z == w:
        comp_lhs = np.zeros_like(Rz)
    else:
        comp_lhs = Rz - Rw

    # inner integral of the w-resolvent at arbitrary nodes
    if branch_w == "+":
        I_w = lambda t: plan.plus_integral(w, +1, t)
        inner_sign = +1.0
    else:
        I_w = lambda t: plan.minus_integral(w, +1, t)
        inner_sign = -1.0
    nu_out = plan.d / 2.0 - 1.0 + 1j * z / b
    shift = -(plan.d / 2.0 + 1j * w / b)

    def smooth(t: np.ndarray) -> np.ndarray:
        # t^{nu_out} * t^{shift} * (+-i/b) I_w(t); Fresnel phases cancelled
        order = np.argsort(t)
        I_sorted = I_w(t[order])
        I_vals = np.empty_like(I_sorted)
        I_vals[order] = I_sorted
        return inner_sign * (1j / b) * t ** (nu_out + shift) * I_vals

    b_wig = 2.0 * np.pi * b  # resolve I_w's Fresnel-scale wiggles

    def width(t: float) -> float:
        w_ = min(0.05 * t, b_wig / max(t, 1e-9) / 8.0)
        rzw = abs((z - w).real)
        if rzw > 1e-12:
            w_ = min(w_, plan.eta * b * t / rzw)
        return max(w_, 1e-7)

    if branch_z == "+":
        edges = _panel_edges(float(r[0]), plan.rho_cap, width, nodes=r)
        panels = _filon_panels(smooth, 0.0, edges)
        tail_const = 0.0 + 0.0j
        if branch_w == "-":
            # beyond the cap the inner I_w freezes at its full value, so the
            # outer integrand keeps an algebraic tail ~ t^{-1 + i(z-w)/b}
            e = nu_out + shift
            if (z - w).imag <= 1e-12:
                raise ValueError("mixed composition needs Im z > Im w")
            I_cap = plan.minus_integral(w, +1, np.array([plan.rho_cap]))[0]
            tail_const = inner_sign * (1j / b) * I_cap \
                * (-plan.rho_cap ** (e + 1.0) / (e + 1.0))
        tail = tail_const + np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
        J = tail[np.searchsorted(edges, r)]
        pref = 1j / b
    elif branch_w == "+":
        raise ValueError("unsupported composition order; swap the roles of "
                         "z and w so the '+' factor sits outside")
    else:
        if w.imag >= b * plan.d / 2.0 or z.imag >= b * plan.d / 2.0:
            raise ValueError("lower-branch composition needs both strips")
        t_head = min(0.4 / plan.ft.x_eff, 0.3)
        edges = _panel_edges(t_head, float(r[-1]), width, nodes=r)
        panels = _filon_panels(smooth, 0.0, edges)
        # head: I_w ~ c0 t^{nu_w + 1}/(nu_w + 1) makes the integrand a power
        nu_w = plan.d / 2.0 - 1.0 + 1j * w / b
        c0 = plan._head_coeffs(w, +1)[0]
        pw = nu_out + shift + nu_w + 1.0
        head = inner_sign * (1j / b) * c0 / (nu_w + 1.0) \
            * t_head ** (pw + 1.0) / (pw + 1.0)
        cum = head + np.concatenate([[0.0], np.cumsum(panels)])
        J = cum[np.searchsorted(edges, r)]
        pref = -1j / b
    comp = pref * r ** (-(plan.d / 2.0 + 1j * z / b)) \
        * np.exp(1j * r ** 2 / (2.0 * b)) * J

    rhs = (z - w) * comp
    scale = max(_ray_metric(r, Rz), _ray_metric(r, Rw), 1e-300)
    return _ray_metric(r, comp_lhs - rhs) / scale


def sigma_shift_check(f: Field, z: complex, b: float, sigma: float,
                      branch: str = "+", r_lo: float = 0.5,
                      r_hi: float | None = None, n: int = 800) -> float:
    """Relative defect of D^sigma R(z) D^{-sigma} = R(z + i b sigma).

    The left side runs D^{-sigma} through the grid multiplier and the
    resolvent at z; the right side shifts z.  Needs data with a spectral
    null at the origin (|xi|^{-sigma} is applied on the grid) and
    sigma < d/2.
    """
    g = fractional_derivative(f, -sigma)
    plan_g = ResolventPlan(g, b)
    plan_f = ResolventPlan(f, b)
    if r_hi is None:
        r_hi = min(plan_f.rho_cap, plan_g.rho_cap) * 0.9
    r = np.geomspace(r_lo, r_hi, n)
    lhs = r ** sigma * plan_g.apply(z, branch, r).values
    rhs = plan_f.apply(z + 1j * b * sigma, branch, r).values
    return _ray_metric(r, lhs - rhs) / _ray_metric(r, rhs)


def resolvent_to_field(f: Field, z: complex, b: float, branch: str = "+",
                       plan: ResolventPlan | None = None) -> Field:
    """Physical-space resolvent on the data grid.

    Both half-lines are evaluated at the grid frequencies; the zero cell
    gets the average of Rhat over [-dxi/2, dxi/2] (8-point Gauss-Legendre
    against the head representation, which is what from_freq's piecewise
    sampling sees at the origin).
    """
    if plan is None:
        plan = ResolventPlan(f, b)
    grid = f.grid
    N = grid.N
    rp = grid.dxi * np.arange(1, N // 2 + 1)      # |xi| nodes
    inside = rp <= plan.rho_cap
    out = np.zeros(N, dtype=np.complex128)
    vals = {}
    for sign in (+1, -1):
        v = np.zeros(rp.size, dtype=np.complex128)
        v[inside] = plan.apply(z, branch, rp[inside], sign).values
        # beyond the cap the "+" branch vanishes with fhat; the "-" branch
        # freewheels on the homogeneous solution
        if branch == "-" and not np.all(inside):
            I_cap = plan.minus_integral(z, sign, np.array([plan.rho_cap]))[0]
            ro = rp[~inside]
            v[~inside] = (-1j / b) * ro ** (-(plan.d / 2.0 + 1j * z / b)) \
                * np.exp(1j * ro ** 2 / (2.0 * b)) * I_cap
        vals[sign] = v
    # fft layout: index k -> xi = k dxi (k < N/2), index N-k -> -k dxi
    out[1:N // 2 + 1] = vals[+1]
    out[N // 2 + 1:] = vals[-1][N // 2 - 2::-1]
    gx, gw = roots_legendre(8)
    cell = 0.0 + 0.0j
    for sign in (+1, -1):
        tt = 0.25 * grid.dxi * (gx + 1.0)         # (0, dxi/2]
        if branch == "-":
            nu = plan.d / 2.0 - 1.0 + 1j * z / b
            cs = plan._head_coeffs(z, sign)
            I_h = np.zeros(tt.size, dtype=np.complex128)
            for nn, cn in enumerate(cs):
                I_h += cn * tt ** (nu + nn + 1) / (nu + nn + 1)
            Rh = (-1j / b) * tt ** (-(plan.d / 2.0 + 1j * z / b)) \
                * np.exp(1j * tt ** 2 / (2.0 * b)) * I_h
        else:
            Rh = plan.apply(z, "+", tt, sign).values
        cell += np.sum(gw * Rh) * 0.25 * grid.dxi
    out[0] = cell / grid.dxi
    return Field(grid.from_freq(out), grid, "physical")


def lambda_decay_scan(f: Field, b: float, lam: np.ndarray | None = None,
                      y_frac: float = 0.2, p: float = 4.0) -> dict:
    """High-energy decay of the resolvent along z = lam + i y, y = y_frac * b.

    Returns the fitted log-log slopes of || R(lam + iy) f ||_{L^p} (expected
    ~ -1) and of the boundary-value jump || (R(lam + iy) - R(lam - iy)) f ||
    (expected ~ -2, one power gained by the cancellation across the
    spectral line).
    """
    from .spectral import Lp as _Lp, norm as _norm
    if lam is None:
        lam = np.geomspace(10.0, 300.0, 7)
    y = y_frac * b
    singles, jumps = [], []
    for lv in lam:
        up = resolvent_to_field(f, lv + 1j * y, b, "+")
        dn = resolvent_to_field(f, lv - 1j * y, b, "-")
        singles.append(_norm(up, _Lp(p)))
        jump = Field(up.values - dn.values, f.grid, "physical")
        jumps.append(_norm(jump, _Lp(p)))
    ll = np.log(lam)
    s1 = np.polyfit(ll, np.log(singles), 1)[0]
    s2 = np.polyfit(ll, np.log(jumps), 1)[0]
    return {"lam": np.asarray(lam), "single": np.asarray(singles),
            "jump": np.asarray(jumps), "slope_single": float(s1),
            "slope_jump": float(s2)}
