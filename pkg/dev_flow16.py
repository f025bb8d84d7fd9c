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
pp = derive_params(1, 7.0, b, 0.49)

rg = RadialGrid(1024, 32.0)
H = linop.assemble_H(prof, grid=rg)
eigs = linop.discrete_spectrum(H, (-3 - 3j, 3 + 3j))
P_disc, P_ess = linop.riesz_projections(eigs)

grid = Grid1D(65536, 128.0)
x = grid.x
Q = flow.profile_on_grid(prof, grid, method="ode")
chi = flow.edge_taper(grid)
v0 = np.ascontiguousarray(Q.values * chi)
cap = 0.6 * grid.L

parity = flow.make_parity_projector(grid)
pair = flow.make_pair_projector(P_ess, rg, grid)
gauge = flow.make_gauge_projector([1j * v0], grid, window=cap)
proj = flow.compose_projectors(parity, pair, gauge)

sig = HomSobolev(0.49)
env = np.exp(-(((np.abs(x) - 80.0) / 24.0) ** 8))
eps0 = env * np.exp(-0.5j * b * x ** 2)
eps0[np.abs(x) < 40.0] = 0.0
eps0 = proj(Field(eps0, grid, "physical")).values
nq = norm(Field(v0, grid, "physical"), sig)
eps0 *= 1e-3 * nq / norm(Field(eps0, grid, "physical"), sig)
print("||eps0||/||Q|| =", norm(Field(eps0, grid, "physical"), sig) / nq,
      "  eps0 amp:", np.abs(eps0).max())

plan = PropagatorPlan(grid, b, oversample=2)
dtau = 2e-3
mask = flow.sponge_mask(grid, dtau, (0.85, 150.0))
va = Field(v0.copy(), grid, "physical")
vb = Field(v0 + eps0, grid, "physical")
K = 25
hist = []
t0 = time.time()
nsteps = 6500
for k in range(1, nsteps + 1):
    va = flow.strang_step(va, dtau, pp, plan, mask)
    vb = flow.strang_step(vb, dtau, pp, plan, mask)
    if k % K == 0:
        ea = proj(Field(va.values - v0, grid, "physical"))
        va = Field(v0 + ea.values, grid, "physical")
        eb = proj(Field(vb.values - v0, grid, "physical"))
        vb = Field(v0 + eb.values, grid, "physical")
        d = Field(vb.values - va.values, grid, "physical")
        hist.append((k * dtau, norm(d, sig),
                     np.abs(vb.values[np.abs(x) < 2]).max()))
print(f"[{time.time()-t0:.1f}s for {nsteps} paired steps]")
arr = np.array([(t, n) for t, n, _ in hist])
for i in range(0, len(hist), 25):
    t, n, camp = hist[i]
    print(f"tau={t:6.2f}  |diff|_sig {n:10.4e}   core amp {camp:7.4f}")
t, n, camp = hist[-1]
print(f"tau={t:6.2f}  |diff|_sig {n:10.4e}   core amp {camp:7.4f}")
law = -b * (0.49 - 1.0 / 6.0)
for lo, hi in [(0.5, 4), (4, 8), (8, 12), (0.8, 12.8)]:
    m = (arr[:, 0] >= lo) & (arr[:, 0] <= hi)
    sl = np.polyfit(arr[m, 0], np.log(arr[m, 1]), 1)[0]
    print(f"window [{lo:4.1f},{hi:4.1f}]  slope {sl:+.4f}   law {law:+.4f} "
          f"  ratio {sl/law:.3f}")
