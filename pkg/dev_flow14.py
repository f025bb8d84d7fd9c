import sys
import time
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D, RadialGrid
from ssnls import flow, linop
from ssnls.propagator import PropagatorPlan
from ssnls.spectral import HomSobolev, norm

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)

rg = RadialGrid(1024, 32.0)
H = linop.assemble_H(prof, grid=rg)
eigs = linop.discrete_spectrum(H, (-3 - 3j, 3 + 3j))
P_disc, P_ess = linop.riesz_projections(eigs)

grid = Grid1D(8192, 48.0)
Q = flow.profile_on_grid(prof, grid, method="ode")
chi = flow.edge_taper(grid)
v0 = np.ascontiguousarray(Q.values * chi)
cap = 0.6 * grid.L
plan = PropagatorPlan(grid, b)
dtau = 1e-3
mask = flow.sponge_mask(grid, dtau, (0.85, 150.0))

parity = flow.make_parity_projector(grid)
pair = flow.make_pair_projector(P_ess, rg, grid)
gauge = flow.make_gauge_projector([1j * v0], grid, window=cap)
proj = flow.compose_projectors(parity, pair, gauge)

x = grid.x
sig25 = HomSobolev(0.25)
eps0 = np.exp(-(x / 3.0) ** 2) * np.cos(40.0 * x)
eps0 = proj(Field(eps0.astype(complex), grid, "physical")).values
nq = norm(Field(v0, grid, "physical"), sig25)
eps0 *= 5e-4 * nq / norm(Field(eps0, grid, "physical"), sig25)

va = Field(v0.copy(), grid, "physical")
vb = Field(v0 + eps0, grid, "physical")
K = 25
sigmas = [0.0, 1.0 / 6.0, 0.25, 0.49]
kinds = [HomSobolev(s) for s in sigmas]
print("tau    " + "  ".join(f"Hs{s:5.3f}" for s in sigmas))
hist = []
t0 = time.time()
for k in range(1, 12001):
    va = flow.strang_step(va, dtau, pp, plan, mask)
    vb = flow.strang_step(vb, dtau, pp, plan, mask)
    if k % K == 0:
        ea = proj(Field(va.values - v0, grid, "physical"))
        va = Field(v0 + ea.values, grid, "physical")
        eb = proj(Field(vb.values - v0, grid, "physical"))
        vb = Field(v0 + eb.values, grid, "physical")
    if k % 250 == 0:
        diff = Field(vb.values - va.values, grid, "physical")
        row = [norm(diff, kd) for kd in kinds]
        hist.append((k * dtau, row))
        print(f"{k*dtau:5.2f}  " + "  ".join(f"{r:9.3e}" for r in row))
print(f"[{time.time()-t0:.1f}s]")
arr = np.array([[t] + r for t, r in hist])
for j, s in enumerate(sigmas):
    for lo, hi in [(1.0, 4.0), (4.0, 7.0), (7.0, 12.0)]:
        m = (arr[:, 0] >= lo) & (arr[:, 0] <= hi)
        sl = np.polyfit(arr[m, 0], np.log(arr[m, j + 1]), 1)[0]
        print(f"sigma={s:5.3f}  window [{lo:4.1f},{hi:4.1f}]  slope {sl:+.4f}")
print("predictions: +bs_c=+0.0832? no: b*s_c =", b / 6.0,
      " -b(0.25-1/6) =", -b * (0.25 - 1 / 6), " -b(0.49-1/6) =", -b * (0.49 - 1 / 6))
