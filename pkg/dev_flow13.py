import sys
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D, RadialGrid
from ssnls import flow, linop
from ssnls.propagator import PropagatorPlan
from ssnls.spectral import windowed_norm, HomSobolev

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)

rg = RadialGrid(1024, 32.0)
H = linop.assemble_H(prof, grid=rg)
eigs = linop.discrete_spectrum(H, (-3 - 3j, 3 + 3j))
idx = eigs.tagged()
P_disc, P_ess = linop.riesz_projections(eigs)

grid = Grid1D(8192, 48.0)
Q = flow.profile_on_grid(prof, grid, method="ode")
chi = flow.edge_taper(grid)
v0 = np.ascontiguousarray(Q.values * chi)
cap = 0.6 * grid.L
plan = PropagatorPlan(grid, b)
dtau = 1e-3
mask = flow.sponge_mask(grid, dtau, (0.85, 150.0))
hs = HomSobolev(pp.sigma)

v = Field(v0.copy(), grid, "physical")
for k in range(1, 5501):
    v = flow.strang_step(v, dtau, pp, plan, mask)
eps = v.values - v0

# parity split about x=0 (grid has x[0]=-L unpaired; drop it)
e = eps.copy()
e[0] = 0.0
er = e[1:][::-1]          # reflected
ev = 0.5 * (e[1:] + er)
od = 0.5 * (e[1:] - er)
pad = lambda a: np.concatenate([[0.0], a])
we = windowed_norm(Field(pad(ev), grid, "physical"), cap, hs)
wo = windowed_norm(Field(pad(od), grid, "physical"), cap, hs)
wt = windowed_norm(Field(eps, grid, "physical"), cap, hs)
print(f"tau=5.5  |eps|_w {wt:.3e}   even part {we:.3e}   odd part {wo:.3e}")

pair = flow.make_pair_projector(P_ess, rg, grid)
out = pair(Field(eps, grid, "physical"))
wr = windowed_norm(out, cap, hs)
print(f"after pair projection: {wr:.3e}  (removed fraction "
      f"{1 - wr/wt:.3f})")

# radial mode coefficients of the resampled even part
half = grid.N // 2
xs = grid.x[half:]
from scipy.interpolate import CubicSpline
sp_re = CubicSpline(xs, eps[half:].real)
sp_im = CubicSpline(xs, eps[half:].imag)
er_rad = sp_re(rg.r) + 1j * sp_im(rg.r)
Z = np.concatenate([er_rad, np.conj(er_rad)])
V = H.volumes()
VV = np.concatenate([V, V])
znorm = np.sqrt((VV * np.abs(Z) ** 2).sum())
for i in idx:
    vl = eigs.left[:, i]
    vr_ = eigs.right[:, i]
    c = (VV * np.conj(vl) * Z).sum() / (VV * np.conj(vl) * vr_).sum()
    mode_norm = np.sqrt((VV * np.abs(vr_) ** 2).sum())
    print(f"mode {eigs.eigenvalues[i]:.4f}: |coeff|*|mode|/|Z| = "
          f"{abs(c) * mode_norm / znorm:.3e}")
print("P_disc Z fraction:", np.linalg.norm(P_disc @ Z) / np.linalg.norm(Z))
