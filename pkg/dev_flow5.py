import sys
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D
from ssnls import flow

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)
grid = Grid1D(4096, 32.0)
Q = flow.profile_on_grid(prof, grid, method="ode")
chi = flow.edge_taper(grid)
v0 = np.ascontiguousarray(Q.values * chi)

plan = flow.PropagatorPlan(grid, b) if hasattr(flow, "PropagatorPlan") else None
from ssnls.propagator import PropagatorPlan
plan = PropagatorPlan(grid, b)
mask = flow.sponge_mask(grid, 1e-3, (0.85, 1.0))

v = Field(v0.copy(), grid, "physical")
dtau = 1e-3
checks = {int(round(t / dtau)) for t in (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)}
x = grid.x
bands = [(0, 2), (2, 8), (8, 16), (16, 22), (22, 27), (27, 32)]
print("tau    sup|v|  @x      " + "  ".join(f"[{a:2d},{b_:2d})" for a, b_ in bands))
for n in range(1, 801):
    v = flow.strang_step(v, dtau, pp, plan, mask)
    if n in checks:
        d = np.abs(v.values - v0)
        i = np.argmax(np.abs(v.values))
        row = "  ".join(
            f"{d[(np.abs(x) >= a) & (np.abs(x) < b_)].max():7.1e}" for a, b_ in bands
        )
        print(f"{n*dtau:5.2f}  {np.abs(v.values[i]):6.3f}  {x[i]:6.2f}  {row}")
