import sys
import time
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D
from ssnls import flow
from ssnls.propagator import PropagatorPlan
from ssnls.spectral import windowed_norm, HomSobolev

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)
grid = Grid1D(4096, 32.0)
Q = flow.profile_on_grid(prof, grid, method="ode")
chi = flow.edge_taper(grid)
v0 = np.ascontiguousarray(Q.values * chi)
x = grid.x
bands = [(0, 8), (8, 22), (22, 27.2), (27.2, 31), (31, 32.01)]

def run(gamma, nonlinear, tau_end, dtau=1e-3, frac=0.85):
    plan = PropagatorPlan(grid, b)
    mask = flow.sponge_mask(grid, dtau, (frac, gamma)) if gamma else None
    v = Field(v0.copy(), grid, "physical")
    n = int(round(tau_end / dtau))
    print(f"--- gamma={gamma} nonlinear={nonlinear} frac={frac}")
    t0 = time.time()
    for k in range(1, n + 1):
        v = flow.strang_step(v, dtau, pp, plan, mask, nonlinear=nonlinear)
        if k % max(n // 8, 1) == 0:
            d = np.abs(v.values - v0)
            row = "  ".join(f"{d[(np.abs(x) >= lo) & (np.abs(x) < hi)].max():7.1e}"
                            for lo, hi in bands)
            dw = windowed_norm(Field(v.values - v0, grid, "physical"), 19.2, HomSobolev(pp.sigma))
            print(f"  tau={k*dtau:5.2f}  dbands: {row}   win-drift {dw:9.3e}")
    print(f"  [{time.time()-t0:.1f}s]")

for g in (50.0, 150.0, 300.0):
    run(g, False, 1.0)
run(150.0, True, 1.0)
