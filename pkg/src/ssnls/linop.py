"""Matrix linearization around a self-similar profile on a radial grid.

The operator acting on the stacked pair Z = (eps, conj(eps)) is

    H = ( D_b - 1        0      )            ( W1          W2  )
        (   0        -D_{-b} + 1)  - i b s_c + ( -conj(W2)  -W1 )

with W1 = (p+1)/2 |Q|^{p-1} real and W2 = (p-1)/2 Q^2 |Q|^{p-3}.  The pair
(i Q, -i conj(Q)) is annihilated exactly (phase resonance), and the spectrum
of the continuum operator is symmetric under z -> -conj(z).

Discretization notes.  Radial D_b = Lap_r + i b (d/2 + r d/dr) is self-adjoint
in L^2(r^{d-1} dr); to keep the discrete free spectrum on the real axis the
Laplacian uses the conservative flux form (symmetric w.r.t. cell volumes) and
the dilation term the split form  (r^d_j + r^d_{j+1})/4  which is exactly
volume-skew.  Only the r = 0 row (d > 1) and the one-sided r = R row break
the structure; the boundary row is the dominant artifact source in where the
continuum-spectrum eigenvalue estimates land.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import CubicSpline

from .grids import RadialGrid, VectorField2
from .profile import Profile


# ---------------------------------------------------------------------------
# finite-difference building blocks


def cell_volumes(grid: RadialGrid, d: int) -> np.ndarray:
    """Quadrature weights; midpoint-rule cells, exact half cell at r = 0."""
    h = grid.dr
    V = grid.r ** (d - 1) * h
    V[0] = (0.5 * h) ** d / d
    return V


def laplacian_matrix(grid: RadialGrid, d: int,
                     closure: str = "one-sided") -> np.ndarray:
    """Radial Laplacian u'' + (d-1)/r u' with an even closure at the axis.

    For d = 1 the interior rows are exactly symmetric w.r.t. the cell
    volumes; for d > 1 pointwise consistency at the first off-axis nodes is
    kept instead (the flux form is O(1) wrong there).  closure selects the
    r = R_max row: "one-sided" second-order stencils (default; non-normal)
    or "dirichlet" (ghost node u(R+h) = 0; keeps the row symmetric).
    """
    if d not in (1, 2, 3):
        raise ValueError(f"d must be 1, 2 or 3, got {d}")
    if closure not in ("one-sided", "dirichlet"):
        raise ValueError(f"unknown closure {closure!r}")
    N, h = grid.N, grid.dr
    r = grid.r
    A = np.zeros((N, N))
    # r = 0: even closure, Lap u(0) = d u''(0) with u'(0) = 0
    A[0, 0] = -2.0 * d / h ** 2
    A[0, 1] = 2.0 * d / h ** 2
    j = np.arange(1, N - 1)
    A[j, j + 1] = 1.0 / h ** 2 + (d - 1) / (2.0 * h * r[j])
    A[j, j - 1] = 1.0 / h ** 2 - (d - 1) / (2.0 * h * r[j])
    A[j, j] = -2.0 / h ** 2
    if closure == "one-sided":
        A[-1, -1] += 2.0 / h ** 2
        A[-1, -2] += -5.0 / h ** 2
        A[-1, -3] += 4.0 / h ** 2
        A[-1, -4] += -1.0 / h ** 2
        c = (d - 1) / (r[-1] * 2.0 * h)
        A[-1, -1] += 3.0 * c
        A[-1, -2] += -4.0 * c
        A[-1, -3] += 1.0 * c
    else:
        A[-1, -1] = -2.0 / h ** 2
        A[-1, -2] = 1.0 / h ** 2 - (d - 1) / (2.0 * h * r[-1])
    return A


def dilation_matrix(grid: RadialGrid, d: int,
                    closure: str = "one-sided") -> np.ndarray:
    """Generator d/2 + r d/dr, split so interior rows are volume-skew (d=1).

    The d = 1 split form (r_j + r_{j+1})/(4h) makes i*b*(this) Hermitian in
    the volume inner product, which pins the free spectrum to the real axis
    up to boundary rows.  For d > 1 the axis cell cannot be both skew and
    consistent, so plain centered differences are used throughout.
    """
    if closure not in ("one-sided", "dirichlet"):
        raise ValueError(f"unknown closure {closure!r}")
    N, h = grid.N, grid.dr
    r = grid.r
    V = cell_volumes(grid, d)
    A = np.zeros((N, N))
    j = np.arange(1, N - 1)
    if d == 1:
        A[j, j + 1] = (r[j] + r[j + 1]) / (4.0 * h)
        A[j, j - 1] = -(r[j] + r[j - 1]) / (4.0 * h)
        A[0, 1] = 0.5  # half-cell flux; skew and consistent at once
    else:
        A[j, j + 1] = r[j] / (2.0 * h)
        A[j, j - 1] = -r[j] / (2.0 * h)
        A[j, j] = 0.5 * d
        A[0, 0] = 0.5 * d
    if closure == "one-sided":
        A[-1, -1] = 0.5 * d + r[-1] * 3.0 / (2.0 * h)
        A[-1, -2] = -r[-1] * 4.0 / (2.0 * h)
        A[-1, -3] = r[-1] * 1.0 / (2.0 * h)
    else:
        # ghost u(R+h) = 0; for d=1 written in the skew split form
        if d == 1:
            A[-1, -2] = -(r[-1] + r[-2]) / (4.0 * h)
        else:
            A[-1, -2] = -r[-1] / (2.0 * h)
            A[-1, -1] = 0.5 * d
    return A


def deformed_block(grid: RadialGrid, d: int, b: float,
                   closure: str = "one-sided") -> np.ndarray:
    return (laplacian_matrix(grid, d, closure)
            + 1j * b * dilation_matrix(grid, d, closure))


def boundary_taper(r: np.ndarray, start_frac: float = 0.85) -> np.ndarray:
    """cos^2 ramp from 1 at start_frac*R down to 0 at R."""
    R = r[-1]
    s = (r - start_frac * R) / ((1.0 - start_frac) * R)
    s = np.clip(s, 0.0, 1.0)
    return np.cos(0.5 * np.pi * s) ** 2


def _resample(r_src: np.ndarray, vals: np.ndarray, r_dst: np.ndarray) -> np.ndarray:
    if r_dst[-1] > r_src[-1] + 1e-12:
        raise ValueError("operator grid extends beyond the stored profile")
    sp_re = CubicSpline(r_src, vals.real)
    sp_im = CubicSpline(r_src, vals.imag)
    return sp_re(r_dst) + 1j * sp_im(r_dst)


def _chirp_resolution(r: np.ndarray, W2: np.ndarray, h: float) -> float:
    """Smallest points-per-oscillation of arg W2 over the resolved tail."""
    keep = (r >= 1.0) & (np.abs(W2) > 1e-12)
    if keep.sum() < 8:
        return np.inf
    phase = np.unwrap(np.angle(W2[keep]))
    k = np.abs(np.gradient(phase, r[keep]))
    kmax = float(np.max(k))
    if kmax == 0.0:
        return np.inf
    return 2.0 * np.pi / (kmax * h)


# ---------------------------------------------------------------------------
# assembly


@dataclass
class OperatorDisc:
    """Dense 2N x 2N discretization of the linearized pair operator."""

    matrix: np.ndarray
    grid: RadialGrid
    d: int
    b: float
    s_c: float
    sigma: float
    conjugated: bool
    W1: np.ndarray          # tapered, as placed in the matrix
    W2: np.ndarray
    closure: str = "one-sided"
    taper_start: float = 0.85
    coarse_tail: bool = False

    @property
    def ess_line_im(self) -> float:
        """Height of the continuum-spectrum line for this representation."""
        sig_eff = self.sigma if self.conjugated else 0.0
        return self.b * (sig_eff - self.s_c)

    def volumes(self) -> np.ndarray:
        return cell_volumes(self.grid, self.d)


def _assemble(grid, d, b, s_c, W1, W2, sigma, conjugated, taper_start,
              closure):
    N = grid.N
    taper = boundary_taper(grid.r, taper_start)
    W1t = W1 * taper
    W2t = W2 * taper
    Db = deformed_block(grid, d, b, closure)
    Dmb = np.conj(Db)           # Lap and dilation stencils are real
    I = np.eye(N)
    H = np.zeros((2 * N, 2 * N), dtype=np.complex128)
    H[:N, :N] = Db - I + np.diag(W1t)
    H[:N, N:] = np.diag(W2t)
    H[N:, :N] = np.diag(-np.conj(W2t))
    H[N:, N:] = -Dmb + I - np.diag(W1t)
    H -= 1j * b * s_c * np.eye(2 * N)
    if conjugated:
        H += 1j * b * sigma * np.eye(2 * N)
    ppo = _chirp_resolution(grid.r, W2t, grid.dr)
    op = OperatorDisc(matrix=H, grid=grid, d=d, b=b, s_c=s_c, sigma=sigma,
                      conjugated=conjugated, W1=W1t, W2=W2t, closure=closure,
                      taper_start=taper_start, coarse_tail=bool(ppo < 8.0))
    if op.coarse_tail:
        warnings.warn(f"grid resolves the potential chirp with only "
                      f"{ppo:.1f} points per oscillation", RuntimeWarning)
    return op


def assemble_H(prof: Profile, sigma: Optional[float] = None,
               conjugated: bool = False, grid: Optional[RadialGrid] = None,
               taper_start: float = 0.85,
               closure: str = "one-sided") -> OperatorDisc:
    """Discretize the linearization around prof on a radial grid.

    The profile is resampled onto the operator grid by cubic spline (the
    stored grid is ~16x finer than any eigensolve-feasible operator grid).
    Potentials are tapered to zero over [taper_start, 1] * r_max so the
    boundary closure never sees them.
    """
    par = prof.params
    if sigma is None:
        sigma = par.sigma
    if grid is None:
        grid = RadialGrid(1024, 16.0)
    Qs = _resample(prof.grid.r, prof.Q, grid.r)
    absQ = np.abs(Qs)
    W1 = 0.5 * (par.p + 1.0) * absQ ** (par.p - 1.0)
    W2 = np.where(absQ > 0.0,
                  0.5 * (par.p - 1.0) * Qs ** 2 * absQ ** (par.p - 3.0), 0.0)
    return _assemble(grid, par.d, prof.b_star, par.s_c, W1.astype(complex),
                     W2, sigma, conjugated, taper_start, closure)


def assemble_free(grid: RadialGrid, d: int, b: float, s_c: float,
                  sigma: float = 0.0, conjugated: bool = False,
                  closure: str = "one-sided") -> OperatorDisc:
    """Zero-potential assembly; the two components decouple."""
    z = np.zeros(grid.N, dtype=np.complex128)
    return _assemble(grid, d, b, s_c, z, z.copy(), sigma, conjugated, 0.85,
                     closure)


# ---------------------------------------------------------------------------
# structural checks


def resonance_vector(prof: Profile, grid: RadialGrid) -> VectorField2:
    Qs = _resample(prof.grid.r, prof.Q, grid.r)
    return VectorField2(1j * Qs, -1j * np.conj(Qs), grid)


def resonance_residual(H: OperatorDisc, prof: Profile,
                       interior_frac: float = 0.8) -> float:
    """Relative volume-weighted L2 norm of H (iQ, -i conj Q) on the interior.

    The window r <= interior_frac * r_max excludes both the one-sided closure
    and the potential taper, where the identity is broken by construction.
    """
    if H.conjugated:
        raise ValueError("resonance check needs the plain (unconjugated) form")
    vec = resonance_vector(prof, H.grid)
    v = np.concatenate([vec.Z1, vec.Z2])
    if not np.any(v):
        raise ValueError("zero resonance vector")
    w = H.matrix @ v
    V = H.volumes()
    keep = H.grid.r <= interior_frac * H.grid.r_max
    kk = np.concatenate([keep, keep])
    VV = np.concatenate([V, V])
    num = np.sqrt(np.sum(VV[kk] * np.abs(w[kk]) ** 2))
    den = np.sqrt(np.sum(VV[kk] * np.abs(v[kk]) ** 2))
    return float(num / den)


# ---------------------------------------------------------------------------
# spectrum


@dataclass
class EigenSet:
    """Full dense spectrum plus localization-based tagging."""

    eigenvalues: np.ndarray
    right: np.ndarray           # columns, unit l2 norm
    left: np.ndarray            # columns; biorthonormalized on tagged block
    scores: np.ndarray          # mass fraction in the outer 30% of the grid
    tags: list                  # "discrete" | "continuum-artifact"
    sides: list                 # "above" | "below" the continuum line
    window: tuple
    loc_threshold: float
    op: OperatorDisc = field(repr=False)
    near_zero: Optional[tuple] = None      # (eigenvalue, score) if recorded
    biorth_residual: float = 0.0

    def tagged(self) -> np.ndarray:
        return np.array([i for i, t in enumerate(self.tags) if t == "discrete"],
                        dtype=int)


def _loc_scores(vecs: np.ndarray, op: OperatorDisc) -> np.ndarray:
    V = op.volumes()
    VV = np.concatenate([V, V])
    outer = op.grid.r > 0.7 * op.grid.r_max
    oo = np.concatenate([outer, outer])
    tot = VV[:, None] * np.abs(vecs) ** 2
    return np.sqrt(tot[oo].sum(axis=0) / tot.sum(axis=0))


def discrete_spectrum(H: OperatorDisc, window: tuple,
                      loc_threshold: float = 0.1) -> EigenSet:
    """Dense eigensolve with the localized/continuum-artifact filter.

    window is a pair of complex corners (lo, hi).  Modes are tagged
    "discrete" when the eigenvalue is inside the window and the eigenvector
    keeps less than loc_threshold of its mass in the outer 30% of the grid;
    everything else is a continuum artifact.  The approximate eigenvalue
    closest to z = 0 is recorded separately (embedded-resonance proxy: its
    vector inherits the profile's slow tail, so localization fails).
    """
    lo, hi = complex(window[0]), complex(window[1])
    if not (lo.real <= hi.real and lo.imag <= hi.imag):
        raise ValueError("window corners must be ordered")
    n = H.matrix.shape[0]
    if n > 4096:
        raise ValueError(f"dense eigensolve capped at 2N = 4096, got {n}")
    lam, vl, vr = sla.eig(H.matrix, left=True, right=True)
    vr = vr / np.linalg.norm(vr, axis=0)
    scores = _loc_scores(vr, H)
    inside = ((lam.real >= lo.real) & (lam.real <= hi.real) &
              (lam.imag >= lo.imag) & (lam.imag <= hi.imag))
    tags = ["discrete" if (inside[k] and scores[k] < loc_threshold)
            else "continuum-artifact" for k in range(n)]
    line = H.ess_line_im
    sides = ["above" if z.imag >= line else "below" for z in lam]

    # biorthonormalize left vectors over the tagged block only
    idx = [k for k, t in enumerate(tags) if t == "discrete"]
    biorth = 0.0
    if idx:
        B = vl[:, idx].conj().T @ vr[:, idx]
        try:
            vl[:, idx] = vl[:, idx] @ np.linalg.inv(B).conj().T
            biorth = float(np.max(np.abs(
                vl[:, idx].conj().T @ vr[:, idx] - np.eye(len(idx)))))
        except np.linalg.LinAlgError:
            biorth = np.inf          # defective cluster; Schur route still works

    near = None
    k0 = int(np.argmin(np.abs(lam)))
    if np.abs(lam[k0]) < 0.5 * abs(H.b) * max(H.s_c, 0.1):
        near = (complex(lam[k0]), float(scores[k0]))

    return EigenSet(eigenvalues=lam, right=vr, left=vl, scores=scores,
                    tags=tags, sides=sides, window=(lo, hi),
                    loc_threshold=loc_threshold, op=H, near_zero=near,
                    biorth_residual=biorth)


def j_symmetry_check(eigs: EigenSet) -> float:
    """Hausdorff distance between the tagged set and its z -> -conj(z) image.

    The matrix identity S conj(H) S = -H (S swaps components) holds exactly
    for the assembled blocks, so this measures only eigensolver scatter and
    tagging consistency.
    """
    idx = eigs.tagged()
    if idx.size == 0:
        return 0.0
    z = eigs.eigenvalues[idx]
    w = -np.conj(z)
    dmat = np.abs(z[:, None] - w[None, :])
    return float(max(dmat.min(axis=1).max(), dmat.min(axis=0).max()))


# ---------------------------------------------------------------------------
# spectral projections


def riesz_projections(eigs: EigenSet) -> tuple[np.ndarray, np.ndarray]:
    """(P_disc, P_ess) for the tagged modes via a sorted Schur form.

    The projector onto the invariant subspace of the tagged cluster is
    computed contour-free: with the cluster ordered first in the Schur form,
    solve T11 R - R T22 = T12 and set P = Z1 (Z1^H + R Z2^H).  This is the
    block formula from the resolvent of the restricted pencil, so defective
    (near-parallel eigenvector) clusters need no special casing.
    """
    H = eigs.op.matrix
    n = H.shape[0]
    idx = eigs.tagged()
    if idx.size == 0:
        return np.zeros((n, n), dtype=complex), np.eye(n, dtype=complex)
    targets = eigs.eigenvalues[idx]
    scale = float(np.max(np.abs(eigs.eigenvalues)))
    tol = 1e-9 * scale
    for _ in range(4):
        T, Z, sdim = sla.schur(
            H, output="complex",
            sort=lambda z: bool(np.min(np.abs(z - targets)) < tol))
        if sdim == idx.size:
            break
        tol *= 10.0
    else:
        raise RuntimeError(f"Schur cluster selection found {sdim} of "
                           f"{idx.size} tagged eigenvalues")
    k = int(sdim)
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    R = sla.solve_sylvester(T11, -T22, T12)
    Z1, Z2 = Z[:, :k], Z[:, k:]
    P_disc = Z1 @ (Z1.conj().T + R @ Z2.conj().T)
    return P_disc, np.eye(n, dtype=complex) - P_disc


def projection_residuals(P: np.ndarray, H: OperatorDisc) -> dict:
    """Idempotence and commutation defects (Frobenius norms)."""
    idem = float(np.linalg.norm(P @ P - P))
    A = H.matrix
    comm = float(np.linalg.norm(P @ A - A @ P) / np.linalg.norm(A))
    return {"idempotence": idem, "commutation": comm}


# ---------------------------------------------------------------------------
# text serialization for the spectrum subcommand


def eigenset_to_text(eigs: EigenSet) -> str:
    lines = [f"# spectrum rows: re im loc_score tag  "
             f"(ess line Im z = {eigs.op.ess_line_im:.6g}, "
             f"loc threshold {eigs.loc_threshold:g})"]
    if eigs.near_zero is not None:
        z, s = eigs.near_zero
        lines.append(f"# near-zero mode: {z.real:+.9e} {z.imag:+.9e} "
                     f"score {s:.4f} (resonance proxy, not localized)")
    order = np.argsort(eigs.eigenvalues.real)
    for k in order:
        z = eigs.eigenvalues[k]
        lines.append(f"{z.real:+.12e} {z.imag:+.12e} "
                     f"{eigs.scores[k]:.6f} {eigs.tags[k]}")
    return "\n".join(lines) + "\n"
