"""Split-step integration of the renormalized blowup flow.

In self-similar variables the equation reads

    i v_tau = -(D_b - 1 - i b s_c) v - v |v|^{p-1},

where D_b = Lap + i b (d/2 + x d/dx), so the ground profile Q_b is a
stationary solution.  The linear half is the exact deformed group times
the scalar e^{(b s_c - i) dtau} (an exact Hdot^{s_c} isometry); the
nonlinear half is an exact pointwise phase rotation; a Strang
composition joins them.  A multiplicative sponge ring damps the box
edge: the deformation transports disturbances outward at speed b|x|,
which outruns the group velocity of everything the smooth fields
contain, so the ring cannot contaminate the interior measurement
window.

Experiments built on the stepper: fixed-point drift, paired-run
perturbation decay with discrete-mode stabilization, critical-norm
growth along an exponentially opening window, and reconstruction of
the blowing-up physical solution via

    lambda(t) = sqrt(2 b (T - t)),   tau(t) = -(1/2b) log((T-t)/T).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .grids import Field, Grid1D, RadialGrid
from .profile import Profile, integrate_profile
from .propagator import PropagatorPlan, free_schrodinger
from .spectral import HomSobolev, Lp, cutoff, norm, windowed_norm


@dataclass(frozen=True)
class FlowConfig:
    """Step size, horizon, sponge geometry, and measurement windows.

    sponge = (inner radius fraction of L, damping rate per unit tau);
    the mask applied after each step is exp(-dtau * rate * w(x)) with a
    C^1 ramp w rising from 0 at the inner radius to 1 at the box edge.
    A rate (not a per-step factor) keeps step-halving self-convergence
    meaningful.  window_r0 opens the norm-measurement window as
    min(r0 e^{b tau}, window_frac * L); None pins it at the cap.
    """

    dtau: float
    tau_end: float
    order: int = 2
    sponge: tuple[float, float] = (0.85, 1.0)
    cadence: int = 20
    window_frac: float = 0.6
    window_r0: float | None = None
    nonlinear: bool = True
    stabilize_every: int = 0

    def __post_init__(self):
        if not (self.dtau > 0.0 and math.isfinite(self.dtau)):
            raise ValueError(f"dtau must be positive and finite, got {self.dtau}")
        if not (self.tau_end >= 0.0 and math.isfinite(self.tau_end)):
            raise ValueError(f"tau_end must be nonnegative, got {self.tau_end}")
        if self.order != 2:
            raise ValueError("only the order-2 Strang composition is implemented")
        frac, rate = self.sponge
        if not (0.7 <= frac <= 1.0):
            raise ValueError(f"sponge inner radius fraction must be >= 0.7, got {frac}")
        if not (rate >= 0.0 and math.isfinite(rate)):
            raise ValueError(f"sponge rate must be nonnegative, got {rate}")
        if not isinstance(self.cadence, int) or self.cadence < 1:
            raise ValueError(f"cadence must be a positive integer, got {self.cadence}")
        if not (0.0 < self.window_frac < 1.0):
            raise ValueError(f"window fraction must sit in (0, 1), got {self.window_frac}")
        if self.window_r0 is not None and not (self.window_r0 > 0.0):
            raise ValueError(f"window_r0 must be positive, got {self.window_r0}")
        if not isinstance(self.stabilize_every, int) or self.stabilize_every < 0:
            raise ValueError("stabilize_every must be a nonnegative integer")


@dataclass(frozen=True)
class RateFit:
    """Affine least-squares result with a residual-bootstrap slope band."""

    slope: float
    intercept: float
    r_squared: float
    ci: tuple[float, float]
    window: tuple[float, float]
    flags: tuple[str, ...] = ()


def _affine_lstsq(x: np.ndarray, y: np.ndarray):
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return A, coef, resid, r2


def fit_affine(x, y, n_boot: int = 200, seed: int = 0, flags=()) -> RateFit:
    """y ~ slope * x + intercept; CI from a residual bootstrap."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 3:
        raise ValueError("affine fit needs at least 3 paired samples")
    A, coef, resid, r2 = _affine_lstsq(x, y)
    yhat = A @ coef
    rng = np.random.default_rng(seed)
    slopes = np.empty(n_boot)
    for k in range(n_boot):
        yk = yhat + rng.choice(resid, size=resid.size, replace=True)
        slopes[k] = np.linalg.lstsq(A, yk, rcond=None)[0][0]
    lo, hi = np.percentile(slopes, [2.5, 97.5])
    return RateFit(float(coef[0]), float(coef[1]), float(r2),
                   (float(lo), float(hi)), (float(x[0]), float(x[-1])),
                   tuple(flags))


def fit_log_rate(taus, values, window: tuple[float, float] | None = None,
                 skip_frac: float = 0.1, n_boot: int = 200, seed: int = 0) -> RateFit:
    """Slope of log(values) against tau with the leading transient excluded.

    skip_frac trims the first part of the window; nonpositive samples
    (possible once a decaying series hits the roundoff floor) are
    dropped with a flag.
    """
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (float(taus[0]), float(taus[-1]))
    lo, hi = window
    lo = lo + skip_frac * (hi - lo)
    inside = (taus >= lo) & (taus <= hi)
    flags = []
    if np.any(values[inside] <= 0.0):
        flags.append("nonpositive-samples-dropped")
    sel = inside & (values > 0.0)
    if np.count_nonzero(sel) < 3:
        raise ValueError("fit window too short after transient removal")
    return fit_affine(taus[sel], np.log(values[sel]), n_boot=n_boot,
                      seed=seed, flags=flags)


# -- substeps ---------------------------------------------------------------

def nonlinear_substep(v: Field, dtau: float, p: float) -> Field:
    # exact flow of i v_tau = -v|v|^{p-1}: the modulus rides along unchanged
    amp = np.abs(v.values)
    return Field(v.values * np.exp(1j * dtau * amp ** (p - 1.0)), v.grid,
                 "physical")


def linear_substep(v: Field, dtau: float, params,
                   plan: PropagatorPlan | None = None) -> Field:
    """e^{i dtau (D_b - 1 - i b s_c)} v.

    The scalar e^{b s_c dtau} cancels the group's Hdot^{s_c} contraction,
    making the substep an exact critical-norm isometry; on Hdot^{sigma}
    it contracts by exactly e^{-b (sigma - s_c) dtau}.  b = 0 falls back
    to the free group (plain NLS regression mode).
    """
    b, s_c = params.b, params.s_c
    if b == 0.0:
        w = free_schrodinger(v, dtau)
    else:
        if plan is None:
            plan = PropagatorPlan(v.grid, b)
        w = plan.apply(v, dtau)
    scale = np.exp((b * s_c - 1j) * dtau)
    return Field(w.values * scale, w.grid, "physical")


def sponge_mask(grid: Grid1D, dtau: float, sponge: tuple[float, float]) -> np.ndarray | None:
    frac, rate = sponge
    if rate == 0.0:
        return None
    r0 = frac * grid.L
    t = np.clip((np.abs(grid.x) - r0) / (grid.L - r0), 0.0, 1.0)
    ramp = np.sin(0.5 * np.pi * t) ** 2
    return np.exp(-dtau * rate * ramp)


def strang_step(v: Field, dtau: float, params,
                plan: PropagatorPlan | None = None,
                mask: np.ndarray | None = None,
                nonlinear: bool = True) -> Field:
    """N(dtau/2) o L(dtau) o N(dtau/2), then the sponge mask.

    With nonlinear=False and mask=None this is bit-for-bit the plain
    linear substep (same code path).
    """
    if nonlinear:
        v = nonlinear_substep(v, 0.5 * dtau, params.p)
    v = linear_substep(v, dtau, params, plan)
    if nonlinear:
        v = nonlinear_substep(v, 0.5 * dtau, params.p)
    if mask is not None:
        v = Field(v.values * mask, v.grid, "physical")
    return v


# -- profile transfer and stabilizers ---------------------------------------

def profile_on_grid(prof: Profile, grid: Grid1D, method: str = "interp") -> Field:
    """Q_b sampled on the box as an even function of x.

    "interp": monotone cubics through modulus and unwrapped phase
    separately (the chirped tail aliases under naive complex
    interpolation).  "ode": re-integrate the profile equation and read
    it off at the exact |x| nodes -- slower, but interpolation-free, for
    runs whose error budget sits below the interpolant's O(h^3).
    """
    ax = np.abs(grid.x)
    if method == "interp":
        if ax.max() > prof.grid.r_max:
            raise ValueError("box reaches past the stored profile; enlarge r_out")
        mod = PchipInterpolator(prof.grid.r, np.abs(prof.Q))
        pha = PchipInterpolator(prof.grid.r, np.unwrap(np.angle(prof.Q)))
        vals = mod(ax) * np.exp(1j * pha(ax))
    elif method == "ode":
        r_eval = np.unique(ax)
        lo = np.searchsorted(r_eval, 1e-6)  # integrator starts off a center series
        traj = integrate_profile(prof.Q0, prof.b_star, prof.params,
                                 r_max=float(r_eval[-1]), r_eval=r_eval[lo:],
                                 rtol=1e-12, atol=1e-14)
        if traj.status != "complete" or traj.r.size != r_eval.size - lo:
            raise RuntimeError("profile re-integration did not span the box")
        Q_of_r = dict(zip(r_eval[lo:], traj.Q))
        for r in r_eval[:lo]:
            Q_of_r[r] = complex(prof.Q0)
        vals = np.array([Q_of_r[r] for r in ax])
    else:
        raise ValueError(f"unknown resampling method {method!r}")
    return Field(vals, grid, "physical")


def edge_taper(grid: Grid1D, start_frac: float = 0.8,
               end_frac: float = 0.95) -> np.ndarray:
    """cos^2 ramp from 1 at start_frac*L down to 0 at end_frac*L.

    The profile's fat tail does not vanish at any finite box, and a bare
    periodization kinks at the seam; the kink radiates broadband junk
    whose high frequencies outrun the outward transport and bathe the
    interior.  Tapered data is the faithful finite-box representation:
    the smooth ring deficit it leaves is low-frequency and is swept
    outward faster than it can disperse back in.
    """
    if not (0.0 < start_frac < end_frac <= 1.0):
        raise ValueError("taper needs 0 < start_frac < end_frac <= 1")
    ax = np.abs(grid.x)
    t = np.clip((ax - start_frac * grid.L)
                / ((end_frac - start_frac) * grid.L), 0.0, 1.0)
    return np.cos(0.5 * np.pi * t) ** 2


def incoming_chirp(grid: Grid1D, b: float, center: float, width: float,
                   power: int = 8) -> Field:
    """Annulus riding the contracting rays: A(|x|) e^{-i b x^2 / 2}.

    Free characteristics of the deformed symbol obey dx/dtau = b x + 2 xi
    with xi(tau) = xi_0 e^{-b tau}; the general ray exits like e^{b tau}
    except on the family x_0 = -xi_0 / b, which contracts to the origin
    forever.  The quadratic phase puts every point of the envelope on
    that family (local frequency -b|x|), so the packet neither escapes
    outward nor piles up at frequency zero: its spectral support just
    slides down, and each Hdot^sigma norm moves along its power law for
    as long as the box can host the slide.  A flat-top envelope
    exp(-((|x|-center)/width)^power) keeps edge diffraction (rays off
    the family) subdominant.  Returns unit-amplitude data; scale it
    against the profile before use.
    """
    if not (0.0 < width < center and center + width < grid.L):
        raise ValueError("chirp annulus must sit inside the box")
    ax = np.abs(grid.x)
    env = np.exp(-(((ax - center) / width) ** power))
    env[ax < center - 1.5 * width] = 0.0
    vals = env * np.exp(-0.5j * b * grid.x ** 2)
    return Field(vals, grid, "physical")


def make_pair_projector(P_ess: np.ndarray, rgrid: RadialGrid, grid: Grid1D,
                        taper_start: float = 0.85) -> Callable[[Field], Field]:
    """Turn the stacked-pair essential projector into a box-field map.

    The perturbation is read at the radial nodes, the discrete-mode
    component (I - P_ess) is removed, tapered to zero at the radial
    edge (the tagged modes live well inside), and subtracted back on
    the box.  Beyond the radial window the field is left untouched.

    Only the x >= 0 branch is read, so the input must be even; odd
    content would be subtracted back with the wrong sign on x < 0.
    Compose with make_parity_projector first (the radial operator only
    speaks for the even sector anyway).
    """
    N = rgrid.N
    if P_ess.shape != (2 * N, 2 * N):
        raise ValueError("projector does not match the radial grid")
    half = grid.N // 2
    xs = grid.x[half:]                      # x >= 0 branch, x[0] == 0
    if rgrid.r_max > xs[-1]:
        raise ValueError("radial window reaches past the box")
    ax = np.abs(grid.x)
    inside = ax <= rgrid.r_max
    t = np.clip((rgrid.r - taper_start * rgrid.r_max)
                / ((1.0 - taper_start) * rgrid.r_max), 0.0, 1.0)
    taper = np.cos(0.5 * np.pi * t) ** 2

    def project(eps: Field) -> Field:
        vals = eps.values
        sp_re = CubicSpline(xs, vals[half:].real)
        sp_im = CubicSpline(xs, vals[half:].imag)
        er = sp_re(rgrid.r) + 1j * sp_im(rgrid.r)
        Z = np.concatenate([er, np.conj(er)])
        removed = (Z - P_ess @ Z)[:N] * taper
        back_re = CubicSpline(rgrid.r, removed.real)
        back_im = CubicSpline(rgrid.r, removed.imag)
        out = vals.copy()
        out[inside] -= back_re(ax[inside]) + 1j * back_im(ax[inside])
        return Field(out, eps.grid, "physical")

    return project


def make_parity_projector(grid: Grid1D) -> Callable[[Field], Field]:
    """Even-sector enforcement: eps(x) -> (eps(x) + eps(-x)) / 2.

    The flow is parity-equivariant and every experiment here starts
    from even data, so odd content is numerical symmetry breaking (the
    grid itself is not mirror-symmetric: x[0] = -L has no +L partner).
    Left to itself that noise feeds any odd-sector discrete modes of
    the linearization, which the radial machinery neither sees nor
    removes; zeroing it is the grid analog of working radially.
    """
    N = grid.N
    mirror = (-np.arange(N)) % N            # x[j] <-> -x[j]; j = 0 self-paired
    def project(eps: Field) -> Field:
        vals = 0.5 * (eps.values + eps.values[mirror])
        return Field(vals, eps.grid, "physical")
    return project


def make_gauge_projector(directions, grid: Grid1D,
                         window: float | None = None) -> Callable[[Field], Field]:
    """L^2-orthogonal removal of explicit directions.

    Fixes the gauge freedoms whose generators sit on the essential
    spectrum (the embedded phase resonance above all) and therefore
    escape the discrete-mode projector.

    The coefficients are read through a smooth window of radius
    `window` when given.  Directions built from a slowly decaying
    profile pick up the sponge ring's standing deficit under the plain
    global pairing, and the resulting coefficient subtracts a visibly
    wrong multiple inside the measurement region; the windowed pairing
    aligns the gauge where it is measured.  The removal itself is still
    the full direction, not its windowed copy.
    """
    G = np.column_stack([np.asarray(g, dtype=complex) for g in directions])
    if window is None:
        w = np.ones(grid.N)
    else:
        w = cutoff(np.abs(grid.x) / float(window))
    gram = G.conj().T @ (w[:, None] * G) * grid.dx
    def project(eps: Field) -> Field:
        c = np.linalg.solve(gram, G.conj().T @ (w * eps.values) * grid.dx)
        return Field(eps.values - G @ c, eps.grid, "physical")
    return project


def compose_projectors(*projectors) -> Callable[[Field], Field]:
    def apply(eps: Field) -> Field:
        for proj in projectors:
            eps = proj(eps)
        return eps
    return apply


# -- time loop and experiments ----------------------------------------------

@dataclass
class DiagnosticsSeries:
    """Snapshot norms along a run, plus whatever fits were attached.

    hsigma_eps is the Hdot^sigma norm of v minus the reference (of v
    itself when no reference was given), measured through the fixed
    interior window at the cap radius -- the sponge ring damages the
    tail by design and must not count as drift.  hsc_v and lpc_v go
    through the window of radius window_R, which opens exponentially
    when the run was configured that way.
    """

    taus: np.ndarray
    hsigma_eps: np.ndarray
    hsc_v: np.ndarray
    lpc_v: np.ndarray
    window_R: np.ndarray
    aborted: bool = False
    flags: tuple[str, ...] = ()
    fits: dict | None = None
    fields: list | None = None
    final: Field | None = None

    def __post_init__(self):
        if self.fits is None:
            self.fits = {}
        taus = np.asarray(self.taus, dtype=float)
        if taus.size > 1 and np.any(np.diff(taus) <= 0.0):
            raise ValueError("snapshot times must increase strictly")
        if not self.aborted:
            for name in ("hsigma_eps", "hsc_v", "lpc_v"):
                arr = np.asarray(getattr(self, name), dtype=float)
                if arr.size and not np.all(np.isfinite(arr)):
                    raise ValueError(f"non-finite {name} in a run that did not abort")

    def __len__(self):
        return len(self.taus)


def evolve(v0: Field, cfg: FlowConfig, params,
           reference: Field | None = None,
           stabilizer: Callable[[Field], Field] | None = None,
           keep_snapshots: bool = False) -> DiagnosticsSeries:
    """Run the split-step loop with diagnostics at the snapshot cadence.

    reference supplies the epsilon = v - reference decomposition (None
    measures v itself).  stabilizer, applied to epsilon every
    cfg.stabilize_every steps, re-imposes a subspace constraint (the
    desk-scale version of evolving on the stable manifold); it needs a
    reference.  tau_end is rounded to a whole number of steps.  A
    windowed critical norm exceeding 1e6 times its initial value aborts
    the run, returning the partial series.
    """
    grid = v0.grid
    if not isinstance(grid, Grid1D):
        raise TypeError("the flow loop runs on a Grid1D box")
    b = params.b
    plan = PropagatorPlan(grid, b) if b > 0.0 else None
    if plan is not None and cfg.dtau > plan.t_max:
        raise ValueError(f"dtau={cfg.dtau} exceeds the rescale budget "
                         f"{plan.t_max:.3g} of the propagator plan")
    if stabilizer is not None and cfg.stabilize_every > 0 and reference is None:
        raise ValueError("a stabilizer needs a reference field")
    mask = sponge_mask(grid, cfg.dtau, cfg.sponge)
    n_steps = int(round(cfg.tau_end / cfg.dtau))
    cap = cfg.window_frac * grid.L
    r0w = cap if cfg.window_r0 is None else min(cfg.window_r0, cap)
    ref_vals = None if reference is None else reference.values
    k_sigma = HomSobolev(params.sigma)
    k_sc = HomSobolev(params.s_c)
    k_pc = Lp(params.p_c)

    taus, e_sig, v_sc, v_pc, radii = [], [], [], [], []
    snaps = [] if keep_snapshots else None
    flags: list[str] = []
    aborted = False

    def snapshot(k: int, vf: Field):
        tau = k * cfg.dtau
        R = min(r0w * math.exp(b * tau), cap) if b > 0.0 else cap
        eps_vals = vf.values if ref_vals is None else vf.values - ref_vals
        taus.append(tau)
        e_sig.append(windowed_norm(Field(eps_vals, grid, "physical"), cap, k_sigma))
        v_sc.append(windowed_norm(vf, R, k_sc))
        v_pc.append(windowed_norm(vf, R, k_pc))
        radii.append(R)
        if snaps is not None:
            snaps.append(vf.copy())

    v = v0.copy()
    snapshot(0, v)
    guard = v_sc[0]
    for k in range(1, n_steps + 1):
        v = strang_step(v, cfg.dtau, params, plan, mask, cfg.nonlinear)
        if (stabilizer is not None and cfg.stabilize_every > 0
                and k % cfg.stabilize_every == 0):
            eps = Field(v.values - ref_vals, grid, "physical")
            v = Field(ref_vals + stabilizer(eps).values, grid, "physical")
        if k % cfg.cadence == 0 or k == n_steps:
            snapshot(k, v)
            bad = not (np.isfinite(v_sc[-1]) and np.isfinite(e_sig[-1])
                       and np.isfinite(v_pc[-1]))
            if bad or (guard > 0.0 and v_sc[-1] > 1e6 * guard):
                aborted = True
                flags.append("norm-blowup")
                break

    return DiagnosticsSeries(np.asarray(taus), np.asarray(e_sig),
                             np.asarray(v_sc), np.asarray(v_pc),
                             np.asarray(radii), aborted, tuple(flags),
                             None, snaps, v)


def perturbation_experiment(prof: Profile, eps0: Field, cfg: FlowConfig, params,
                            stabilizer: Callable[[Field], Field] | None = None,
                            resample: str = "interp",
                            skip_frac: float = 0.1):
    """Evolve Q_b + eps0 against a matched base run and fit the decay.

    The paired difference cancels the base run's own discretization and
    sponge drift, so the fitted hsigma series tracks the linearized
    dynamics around the numerical profile rather than around the exact
    one.  Unlike the drift diagnostic, the difference norm is taken on
    the full grid: the group contracts Hdot^sigma globally at the exact
    rate, while any fixed window loses the outward-transported content
    and over-reads the decay.  A difference exceeding 10x its initial
    size truncates the fit window and flags unstable-mode domination.
    Returns (series, fit); fit is None for eps0 = 0.
    """
    grid = eps0.grid
    Qg = profile_on_grid(prof, grid, method=resample)
    k_sigma = HomSobolev(params.sigma)
    n0 = norm(eps0, k_sigma)
    if n0 > 1e-3 * norm(Qg, k_sigma):
        raise ValueError("perturbation exceeds the linear-regime budget "
                         "(1e-3 of the profile in Hdot^sigma)")
    base = evolve(Qg, cfg, params, reference=Qg, stabilizer=stabilizer,
                  keep_snapshots=True)
    pert = evolve(Field(Qg.values + eps0.values, grid, "physical"), cfg, params,
                  reference=Qg, stabilizer=stabilizer, keep_snapshots=True)
    m = min(len(base), len(pert))
    taus = pert.taus[:m]
    diff = np.array([norm(Field(pert.fields[k].values - base.fields[k].values,
                                grid, "physical"), k_sigma)
                     for k in range(m)])
    flags = list(dict.fromkeys(base.flags + pert.flags))
    hi = float(taus[-1])
    if n0 > 0.0:
        over = np.nonzero(diff > 10.0 * diff[0])[0]
        if over.size:
            hi = float(taus[over[0]])
            flags.append("unstable-mode dominated")
    series = DiagnosticsSeries(taus, diff, pert.hsc_v[:m], pert.lpc_v[:m],
                               pert.window_R[:m],
                               base.aborted or pert.aborted, tuple(flags),
                               None, None, pert.final)
    fit = None
    if n0 > 0.0:
        fit = fit_log_rate(taus, diff, window=(float(taus[0]), hi),
                           skip_frac=skip_frac)
        fit = RateFit(fit.slope, fit.intercept, fit.r_squared, fit.ci,
                      fit.window, tuple(dict.fromkeys(fit.flags + tuple(flags))))
        series.fits["hsigma_eps"] = fit
    return series, fit


def critical_norm_track(series: DiagnosticsSeries, params) -> dict[str, RateFit]:
    """Affine fits of ||v||^2 at s_c and ||v||^{p_c} at p_c against tau.

    Only the pre-plateau snapshots count: once the opening window hits
    its cap the log-growth budget is spent and the norms flatten, which
    is flagged rather than fitted.
    """
    R = np.asarray(series.window_R, dtype=float)
    flags = []
    dR = np.diff(R)
    if R.size < 3:
        raise ValueError("too few snapshots to fit")
    if np.all(dR <= 1e-12):
        flags.append("window-fixed")
        sel = np.arange(R.size)
    else:
        growing = np.nonzero(dR > 1e-12)[0]
        stop = int(growing[-1]) + 1
        if stop < R.size - 1:
            flags.append("window-saturated")
        sel = np.arange(stop + 1)
    if sel.size < 3:
        raise ValueError("pre-plateau window has too few snapshots to fit")
    taus = series.taus[sel]
    hsc = series.hsc_v[sel]
    if hsc.max() < 2.0 * hsc.min():
        flags.append("sub-doubling-growth")
    fits = {
        "hsc_sq": fit_affine(taus, hsc ** 2, flags=flags),
        "lpc_pc": fit_affine(taus, series.lpc_v[sel] ** params.p_c, flags=flags),
    }
    series.fits.update(fits)
    return fits


def physical_reconstruction(v: Field, tau: float, params,
                            T: float | None = None):
    """Undo the renormalization: u(x) = lambda^{-2/(p-1)} v(x/lambda) e^{i tau}.

    t = T (1 - e^{-2 b tau}) normalizes tau(0) = 0; the default horizon
    T = 1/(2b) makes lambda(0) = 1, so u and v agree at tau = 0.  The
    returned field lives on the contracted box of half-width lambda L.
    """
    if tau < 0.0:
        raise ValueError(f"renormalized time must be nonnegative, got {tau}")
    b = params.b
    if not (b > 0.0):
        raise ValueError("reconstruction needs b > 0")
    if T is None:
        T = 1.0 / (2.0 * b)
    if not (T > 0.0):
        raise ValueError(f"blowup time must be positive, got {T}")
    t = T * (1.0 - math.exp(-2.0 * b * tau))
    lam = math.sqrt(2.0 * b * (T - t))
    grid = Grid1D(v.grid.N, lam * v.grid.L)
    amp = lam ** (-2.0 / (params.p - 1.0))
    u = Field(v.values * (amp * np.exp(1j * tau)), grid, "physical")
    return u, t


# -- persistence -------------------------------------------------------------

CSV_HEADER = "tau,hsigma_eps,hsc_v,lpc_v,window_R"


def series_to_csv(series: DiagnosticsSeries) -> str:
    rows = [CSV_HEADER]
    for k in range(len(series)):
        rows.append("%.12e,%.12e,%.12e,%.12e,%.12e"
                    % (series.taus[k], series.hsigma_eps[k],
                       series.hsc_v[k], series.lpc_v[k], series.window_R[k]))
    return "\n".join(rows) + "\n"


def _fit_to_dict(fit: RateFit) -> dict:
    return {"slope": fit.slope, "intercept": fit.intercept,
            "r_squared": fit.r_squared, "ci": list(fit.ci),
            "window": list(fit.window), "flags": list(fit.flags)}


def save_series(series: DiagnosticsSeries, path: str,
                extra: dict | None = None) -> None:
    """CSV of the snapshots plus a JSON sidecar (path + ".json") carrying
    fits, flags, and whatever provenance the caller passes in extra."""
    with open(path, "w") as fh:
        fh.write(series_to_csv(series))
    sidecar = {
        "aborted": series.aborted,
        "flags": list(series.flags),
        "fits": {name: _fit_to_dict(fit)
                 for name, fit in sorted(series.fits.items())},
    }
    if extra:
        sidecar.update(extra)
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
