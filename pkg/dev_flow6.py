import sys
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D
from ssnls import flow
from ssnls.propagator import PropagatorPlan

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)
grid = Grid1D(4096, 32.0)
Q = flow.profile_on_grid(prof, grid, method="ode")
chi = flow.edge_taper(grid)
v0 = np.ascontiguousarray(Q.values * chi)
x = grid.x
bands = [(0, 8), (8, 22), (22, 27), (27, 31), (31, 32.01)]

def run(label, nonlinear, gamma, n=200, dtau=1e-3):
    plan = PropagatorPlan(grid, b)
    mask = flow.sponge_mask(grid, dtau, (0.85, gamma)) if gamma else None
    v = Field(v0.copy(), grid, "physical")
    print(f"--- {label}")
    for k in range(1, n + 1):
        v = flow.strang_step(v, dtau, pp, plan, mask, nonlinear=nonlinear)
        if k % 50 == 0:
            a = np.abs(v.values)
            row = "  ".join(f"{a[(np.abs(x) >= lo) & (np.abs(x) < hi)].max():7.1e}"
                            for lo, hi in bands)
            print(f"  tau={k*dtau:4.2f}  sup bands: {row}")

run("linear only, no sponge", False, 0.0)
run("linear only, sponge",    False, 1.0)
run("nonlinear,  no sponge",  True,  0.0)
run("nonlinear,  sponge",     True,  1.0)
