"""Self-similar profiles by two-parameter radial shooting.

The profile solves

    Q'' + (d-1)/r Q' - Q + i b (2/(p-1) Q + r Q') + Q |Q|^{p-1} = 0,
    Q'(0) = 0,  Q(0) = Q0 > 0  (phase gauge),

and for large r the linearization carries two branches,

    slow:  r^{-2/(p-1) - i/b}                     |Q| -> c_p r^{-2/(p-1)},
    fast:  r^gamma e^{-i b r^2/2},   gamma = 2/(p-1) - d + i/b.

The fast branch is inadmissible: its derivative grows like r^{gamma + 1}
against the decay bound r^{-(p+1)/(p-1)} on Q'.  Shooting therefore tunes
the two real unknowns (Q0, b) until the complex fast amplitude extracted
from Q' on an outer window vanishes; the amplitude is read off by least
squares against the explicit branch derivatives, which demodulates the
quadratic chirp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .grids import Field, RadialGrid
from .params import ModelParams, derive_params


def profile_rhs(r: float, Q: complex, Qp: complex, params: ModelParams,
                b: float | None = None) -> complex:
    """Q'' from the profile equation; the r = 0 limit uses the even series
    Q''(0) = (Q - i b (2/(p-1)) Q - Q |Q|^{p-1}) / d."""
    d, p = params.d, params.p
    if b is None:
        b = params.b
    a = 2.0 / (p - 1.0)
    drive = Q - 1j * b * a * Q - Q * abs(Q) ** (p - 1.0)
    if r == 0.0:
        return drive / d
    return -(d - 1.0) / r * Qp + drive - 1j * b * r * Qp


def _rhs_real(d: int, p: float, b: float):
    a = 2.0 / (p - 1.0)
    pm1 = p - 1.0

    def rhs(r, y):
        Q = y[0] + 1j * y[1]
        Qp = y[2] + 1j * y[3]
        Qpp = Q - 1j * b * a * Q - Q * abs(Q) ** pm1 - 1j * b * r * Qp
        if r > 0.0:
            Qpp -= (d - 1.0) / r * Qp
        else:
            Qpp /= d
        return (y[2], y[3], Qpp.real, Qpp.imag)
    return rhs


@dataclass
class Trajectory:
    r: np.ndarray
    Q: np.ndarray
    Qp: np.ndarray
    status: str            # "complete" | "blowup" | "vanished"


def integrate_profile(Q0: float, b: float, params: ModelParams,
                      r_max: float, r_eval: np.ndarray | None = None,
                      rtol: float = 1e-10, atol: float = 1e-12,
                      floor_frac: float = 1e-3) -> Trajectory:
    """Integrate outward from the regular center to r_max.

    Starts at r0 = 1e-6 off the series Q(r) = Q0 + Q''(0) r^2/2.  The run
    stops early when |Q| blows past 50 max(Q0, 1); a collapse of |Q| below
    floor_frac * Q0 (an inadmissible zero crossing) is detected on the
    sample sequence -- a transversal zero between samples is resolved by
    the sampling density, not by the root finder -- and the trajectory is
    truncated just before the dip with status "vanished".
    """
    if not (Q0 > 0.0):
        raise ValueError(f"phase gauge needs Q0 > 0, got {Q0}")
    d, p = params.d, params.p
    Qpp0 = profile_rhs(0.0, Q0 + 0.0j, 0.0j, params, b)
    r0 = 1e-6
    y0 = [Q0 + 0.5 * Qpp0.real * r0 ** 2, 0.5 * Qpp0.imag * r0 ** 2,
          Qpp0.real * r0, Qpp0.imag * r0]

    cap2 = (50.0 * max(Q0, 1.0)) ** 2
    floor2 = (floor_frac * Q0) ** 2

    def blowup(r, y):
        return cap2 - (y[0] ** 2 + y[1] ** 2)
    blowup.terminal = True
    blowup.direction = -1.0

    def collapsed(r, y):
        return (y[0] ** 2 + y[1] ** 2) - floor2
    collapsed.terminal = True
    collapsed.direction = -1.0

    if r_eval is not None:
        r_eval = np.asarray(r_eval, dtype=float)
        if r_eval[0] < r0:
            raise ValueError("evaluation nodes must start at or above 1e-6")
    sol = solve_ivp(_rhs_real(d, p, b), (r0, r_max), y0, method="DOP853",
                    rtol=rtol, atol=atol, t_eval=r_eval,
                    events=[blowup, collapsed], dense_output=False)
    if sol.status == -1:
        raise RuntimeError(f"integrator failed at r ~ {sol.t[-1]:.3g}: "
                           f"{sol.message}")
    status = "complete"
    if sol.status == 1:
        status = "blowup" if sol.t_events[0].size else "vanished"
    Q = sol.y[0] + 1j * sol.y[1]
    Qp = sol.y[2] + 1j * sol.y[3]
    r = sol.t
    dips = np.nonzero(np.abs(Q) ** 2 < floor2)[0]
    if dips.size:
        k = int(dips[0])
        r, Q, Qp, status = r[:k], Q[:k], Qp[:k], "vanished"
    return Trajectory(r, Q, Qp, status)


def _branch_derivatives(r: np.ndarray, d: int, p: float, b: float):
    """Derivative samples of the three far-field basis functions: the fast
    chirp and the slow power with its first r^{-2} correction."""
    a = 2.0 / (p - 1.0)
    gam = a - d + 1j / b
    fast = (gam / r - 1j * b * r) * r ** gam * np.exp(-0.5j * b * r ** 2)
    slow1 = -(a + 1j / b) * r ** (-a - 1.0 - 1j / b)
    slow2 = -(a + 2.0 + 1j / b) * r ** (-a - 3.0 - 1j / b)
    return fast, slow1, slow2


def shooting_objective(Q0: float, b: float, params: ModelParams,
                       fit_window: tuple[float, float],
                       rtol: float = 1e-10) -> complex:
    """Complex amplitude of the fast chirped branch over the fit window.

    The admissible profile has objective = 0; the amplitude supplies the two
    real matching conditions for the two real unknowns (Q0, b).
    """
    R1, R2 = fit_window
    if not (0.0 < R1 < R2):
        raise ValueError(f"bad fit window ({R1}, {R2})")
    periods = b * (R2 ** 2 - R1 ** 2) / (4.0 * np.pi)
    if periods < 5.0:
        raise ValueError(f"fit window holds {periods:.2f} chirp periods, "
                         "need at least 5")
    n_win = int(min(max(512, 64 * periods), 8192))
    r_win = np.linspace(R1, R2, n_win)
    traj = integrate_profile(Q0, b, params, R2 + 1e-9, r_eval=r_win,
                             rtol=rtol)
    if traj.status != "complete":
        raise RuntimeError(f"trajectory stopped early ({traj.status}) at "
                           f"r ~ {traj.r[-1]:.3g}")
    cols = np.stack(_branch_derivatives(r_win, params.d, params.p, b), axis=1)
    coef, *_ = np.linalg.lstsq(cols, traj.Qp, rcond=None)
    return complex(coef[0])


def find_profile(params: ModelParams,
                 bracket: tuple[tuple[float, float], tuple[float, float]],
                 r_max: float | None = None, r_out: float = 200.0,
                 n_grid: int = 32769, newton_tol: float = 1e-8,
                 max_iter: int = 100, rtol: float = 1e-10) -> "Profile":
    """Damped Newton on (Q0, b) driving |shooting_objective| below tol.

    bracket = ((Q0_lo, Q0_hi), (b_lo, b_hi)); iterates are clamped into it.
    The Newton integration radius defaults to sqrt(200 pi / b_lo) so the fit
    window (outer 20%) always holds enough chirp oscillations; the converged
    root is then integrated once out to r_out, where the outer decade
    [r_out/10, r_out] is genuinely asymptotic, for the far-field metadata.
    """
    (q_lo, q_hi), (b_lo, b_hi) = bracket
    if not (0.0 < q_lo < q_hi and 0.0 < b_lo < b_hi):
        raise ValueError(f"bad bracket {bracket}")
    if r_max is None:
        r_max = math.sqrt(200.0 * np.pi / b_lo)
    window = (0.8 * r_max, r_max)

    def F(x):
        val = shooting_objective(x[0], x[1], params, window, rtol=rtol)
        return np.array([val.real, val.imag])

    x = np.array([0.5 * (q_lo + q_hi), 0.5 * (b_lo + b_hi)])
    fx = F(x)
    converged = False
    for _ in range(max_iter):
        if np.hypot(*fx) < newton_tol:
            converged = True
            break
        J = np.empty((2, 2))
        for j, h in enumerate((1e-6 * max(1.0, x[0]), 1e-6 * max(0.1, x[1]))):
            xh = x.copy()
            xh[j] += h
            J[:, j] = (F(xh) - fx) / h
        try:
            step = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError:
            raise RuntimeError("singular shooting Jacobian")
        lam = 1.0
        for _ in range(10):
            xn = np.clip(x + lam * step, [q_lo, b_lo], [q_hi, b_hi])
            try:
                fn = F(xn)
            except RuntimeError:
                fn = None
            if fn is not None and np.hypot(*fn) < np.hypot(*fx):
                x, fx = xn, fn
                break
            lam *= 0.5
        else:
            break                       # no descent; report non-convergence
    if not converged and np.hypot(*fx) >= newton_tol:
        raise RuntimeError(
            f"shooting did not converge: |objective| = {np.hypot(*fx):.3e} "
            f"at Q0 = {x[0]:.8g}, b = {x[1]:.8g}\n"
            + _landscape(params, bracket, window, rtol))

    return _assemble(params, float(x[0]), float(x[1]), r_out, n_grid, rtol)


def _landscape(params, bracket, window, rtol) -> str:
    (q_lo, q_hi), (b_lo, b_hi) = bracket
    rows = ["|objective| landscape (rows Q0, cols b):"]
    for q in np.linspace(q_lo, q_hi, 7):
        cells = []
        for bb in np.linspace(b_lo, b_hi, 7):
            try:
                cells.append(f"{abs(shooting_objective(q, bb, params, window, rtol=1e-8)):9.2e}")
            except (RuntimeError, ValueError):
                cells.append("      ---")
        rows.append(f"  Q0={q:.4f}: " + " ".join(cells))
    return "\n".join(rows)


@dataclass
class Profile:
    """Converged self-similar profile with far-field metadata."""

    params: ModelParams
    grid: RadialGrid
    Q: np.ndarray
    Qprime: np.ndarray
    b_star: float
    Q0: float
    c_p: float
    flatness: float
    qp_decay: float        # sup r^{(p+1)/(p-1)} |Q'| over the outer decade


def _assemble(params: ModelParams, Q0: float, b_star: float, r_max: float,
              n_grid: int, rtol: float) -> Profile:
    grid = RadialGrid(n_grid, r_max)
    traj = integrate_profile(Q0, b_star, params, r_max, r_eval=grid.r[1:],
                             rtol=rtol)
    if traj.status != "complete":
        raise RuntimeError(f"converged parameters stopped early: {traj.status}")
    Q = np.concatenate([[Q0 + 0.0j], traj.Q])
    Qp = np.concatenate([[0.0j], traj.Qp])

    p = params.p
    a = 2.0 / (p - 1.0)
    outer = grid.r >= r_max / 10.0
    ro = grid.r[outer]
    amp = ro ** a * np.abs(Q[outer])
    c_p = float(np.mean(amp))
    flatness = float((np.max(amp) - np.min(amp)) / c_p)
    qp_decay = float(np.max(ro ** (a + 1.0) * np.abs(Qp[outer])))

    if np.min(np.abs(Q)) <= 0.0:
        raise RuntimeError("profile vanishes on the grid")
    if flatness >= 0.01:
        raise RuntimeError(f"outer-decade flatness {flatness:.3e} >= 1e-2")

    params = derive_params(params.d, params.p, b_star, params.sigma)
    return Profile(params=params, grid=grid, Q=Q, Qprime=Qp, b_star=b_star,
                   Q0=Q0, c_p=c_p, flatness=flatness, qp_decay=qp_decay)


# ---------------------------------------------------------------------------
# validation helpers

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def profile_residual(prof: Profile) -> float:
    """sup |Delta Q - Q + ib(2/(p-1) Q + r Q') + Q|Q|^{p-1}| from the stored
    Q samples alone (fourth-order differences, even reflection at r = 0;
    the two right-edge nodes are excluded)."""
    d, p, b = prof.params.d, prof.params.p, prof.b_star
    a = 2.0 / (p - 1.0)
    r, Q = prof.grid.r, prof.Q
    h = prof.grid.dr
    ext = np.concatenate([Q[2:0:-1], Q])            # ghosts Q[-j] = Q[j]
    n = Q.size - 2
    Qpp = sum(c * ext[j:j + n] for j, c in enumerate(_D2)) / h ** 2
    Qp = sum(c * ext[j:j + n] for j, c in enumerate(_D1)) / h
    rc, Qc = r[:n], Q[:n]
    lap = Qpp.copy()
    lap[0] *= d                                     # radial limit d Q''(0)
    lap[1:] += (d - 1.0) / rc[1:] * Qp[1:]
    res = lap - Qc + 1j * b * (a * Qc + rc * Qp) + Qc * np.abs(Qc) ** (p - 1.0)
    return float(np.max(np.abs(res)))


def far_field_slope(prof: Profile) -> float:
    """log|Q| vs log r slope over the outer decade (expect -2/(p-1))."""
    outer = prof.grid.r >= prof.grid.r_max / 10.0
    return float(np.polyfit(np.log(prof.grid.r[outer]),
                            np.log(np.abs(prof.Q[outer])), 1)[0])


def potentials_from_profile(prof: Profile) -> tuple[Field, Field]:
    """W1 = (p+1)/2 |Q|^{p-1} and W2 = (p-1)/2 Q^2 |Q|^{p-3}; both decay
    like r^{-2} by the self-similar far field."""
    p = prof.params.p
    absQ = np.abs(prof.Q)
    W1 = 0.5 * (p + 1.0) * absQ ** (p - 1.0)
    W2 = 0.5 * (p - 1.0) * prof.Q ** 2 * absQ ** (p - 3.0)
    return (Field(W1 + 0.0j, prof.grid, "physical"),
            Field(W2, prof.grid, "physical"))


# ---------------------------------------------------------------------------
# columnar text serialization; %.17g keeps float64 round trips bit-exact

def save_profile(prof: Profile, path: str) -> None:
    head = [("d", prof.params.d), ("p", prof.params.p),
            ("sigma", prof.params.sigma), ("b_star", prof.b_star),
            ("Q0", prof.Q0), ("c_p", prof.c_p),
            ("flatness", prof.flatness), ("qp_decay", prof.qp_decay)]
    lines = ["# selfsim-profile 1"]
    lines += [f"# {k} {v:.17g}" if isinstance(v, float) else f"# {k} {v}"
              for k, v in head]
    lines.append("# columns: r ReQ ImQ ReQp ImQp")
    cols = np.column_stack([prof.grid.r, prof.Q.real, prof.Q.imag,
                            prof.Qprime.real, prof.Qprime.imag])
    body = "\n".join(" ".join(f"{v:.17g}" for v in row) for row in cols)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n" + body + "\n")


def load_profile(path: str) -> Profile:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2:
                    meta[parts[0]] = parts[1]
            else:
                rows.append([float(v) for v in line.split()])
    data = np.array(rows)
    params = derive_params(int(meta["d"]), float(meta["p"]),
                           float(meta["b_star"]), float(meta["sigma"]))
    r = data[:, 0]
    grid = RadialGrid(r.size, float(r[-1]))
    if not np.allclose(grid.r, r, rtol=0.0, atol=1e-12 * r[-1]):
        raise ValueError("profile file nodes are not a uniform radial grid")
    return Profile(params=params, grid=grid,
                   Q=data[:, 1] + 1j * data[:, 2],
                   Qprime=data[:, 3] + 1j * data[:, 4],
                   b_star=float(meta["b_star"]), Q0=float(meta["Q0"]),
                   c_p=float(meta["c_p"]), flatness=float(meta["flatness"]),
                   qp_decay=float(meta["qp_decay"]))
