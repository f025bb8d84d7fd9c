import sys
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D, RadialGrid
from ssnls import flow, linop
from ssnls.propagator import PropagatorPlan
from ssnls.spectral import windowed_norm, HomSobolev, norm

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
base = windowed_norm(Field(v0, grid, "physical"), cap, HomSobolev(pp.sigma))
pair = flow.make_pair_projector(P_ess, rg, grid)
gauge = flow.make_gauge_projector(
    [Field(1j * v0, grid, "physical").values], grid)

v = Field(v0.copy(), grid, "physical")
K = 25
hs = HomSobolev(pp.sigma)
for k in range(1, 201):
    v = flow.strang_step(v, dtau, pp, plan, mask)
    if k % K == 0:
        eps = Field(v.values - v0, grid, "physical")
        nb = windowed_norm(eps, cap, hs)
        e1 = pair(eps)
        d_pair = norm(Field(e1.values - eps.values, grid, "physical"), hs)
        e2 = gauge(e1)
        d_gauge = norm(Field(e2.values - e1.values, grid, "physical"), hs)
        na = windowed_norm(e2, cap, hs)
        print(f"k={k:4d} tau={k*dtau:5.3f}  |eps|_w {nb:9.3e}  "
              f"pair-removed {d_pair:9.3e}  gauge-removed {d_gauge:9.3e}  "
              f"after {na:9.3e}")
        v = Field(v0 + e2.values, grid, "physical")
