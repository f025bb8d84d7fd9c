import sys
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D
from ssnls.spectral import HomSobolev, norm
from ssnls.propagator import PropagatorPlan
from ssnls import flow

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)
grid = Grid1D(4096, 32.0)
Q = flow.profile_on_grid(prof, grid, method="ode")
plan = PropagatorPlan(grid, b)
dtau = 1e-3

# one bare strang step, no sponge: local departure from stationarity
v1 = flow.strang_step(Q, dtau, pp, plan, None)
d = v1.values - Q.values
print("one step: max|dv|", np.abs(d).max(), "at x=", grid.x[np.argmax(np.abs(d))])
print("          rel L2  ", np.linalg.norm(d) / np.linalg.norm(Q.values))

# locate the error: linear substep alone on Q vs exact linear solution of
# the linearized... instead compare the full residual decomposition:
# N(dt/2) Q
w = flow.nonlinear_substep(Q, 0.5 * dtau, pp.p)
print("NL half-step phase at 0:", np.angle(w.values[grid.N // 2] / Q.values[grid.N // 2]),
      "expected", 0.5 * dtau * np.abs(Q.values[grid.N // 2]) ** 6)
# L(dt)
u = flow.linear_substep(w, dtau, pp, plan)
d2 = u.values - Q.values
print("after N+L: max|dv|", np.abs(d2).max(), "at x=", grid.x[np.argmax(np.abs(d2))])

# profile equation residual on the box as sanity: Lap Q - Q - i b s_c Q
# + i b (d/2 + x d/dx) Q + Q|Q|^6 via spectral derivatives
xi = grid.xi
Qh = grid.to_freq(Q.values)
lap = grid.from_freq(-xi ** 2 * Qh)
dQ = grid.from_freq(1j * xi * Qh)
res = (lap + 1j * b * (0.5 * Q.values + grid.x * dQ) - (1.0 + 1j * b * pp.s_c) * Q.values
       + Q.values * np.abs(Q.values) ** 6)
print("box-equation residual: max", np.abs(res).max(),
      "interior max", np.abs(res[np.abs(grid.x) < 20]).max())
i_edge = np.argmax(np.abs(res))
print("   worst at x =", grid.x[i_edge])
