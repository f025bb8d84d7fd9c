import sys
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

def run(gamma, tau_end, dtau=1e-3, frac=0.85):
    plan = PropagatorPlan(grid, b)
    mask = flow.sponge_mask(grid, dtau, (frac, gamma))
    v = Field(v0.copy(), grid, "physical")
    n = int(round(tau_end / dtau))
    print(f"--- gamma={gamma} frac={frac}")
    hist = []
    for k in range(1, n + 1):
        v = flow.strang_step(v, dtau, pp, plan, mask)
        if k % 100 == 0:
            dw = windowed_norm(Field(v.values - v0, grid, "physical"), 19.2,
                               HomSobolev(pp.sigma))
            hist.append((k * dtau, dw))
    for tau, dw in hist[-12:]:
        print(f"  tau={tau:5.2f}  win-drift {dw:9.3e}")
    # rate fit over last stretch
    ts = np.array([t for t, _ in hist[-8:]])
    ys = np.log([d for _, d in hist[-8:]])
    r = np.polyfit(ts, ys, 1)[0]
    print(f"  late growth rate ~ {r:.2f}")
    d = np.abs(v.values - v0)
    # profile of the growing structure
    for lo, hi in [(0, 1), (1, 2), (2, 4), (4, 6), (6, 9), (9, 13), (13, 18),
                   (18, 23), (23, 26), (26, 28), (28, 30), (30, 32.01)]:
        m = (np.abs(x) >= lo) & (np.abs(x) < hi)
        print(f"    |x| in [{lo:4.1f},{hi:4.1f}): max|d| {d[m].max():8.2e}")
    i = np.argmax(d[np.abs(x) < 23])
    print("    argmax inside |x|<23 at x =", x[np.abs(x) < 23][i])
    return v

run(150.0, 2.5)
run(300.0, 2.5)
