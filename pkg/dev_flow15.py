import sys
import time
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D
from ssnls import flow
from ssnls.propagator import PropagatorPlan
from ssnls.spectral import HomSobolev, norm

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)

grid = Grid1D(8192, 48.0)
x = grid.x
# incoming-chirp annulus: envelope on |x| in [20, 38], local frequency -b x
env = np.exp(-((np.abs(x) - 29.0) / 6.0) ** 8)   # flat-top annulus
eps0 = env * np.exp(-0.5j * b * x ** 2)
eps0[np.abs(x) < 12.0] = 0.0

plan = PropagatorPlan(grid, b)
dtau = 1e-3
mask = flow.sponge_mask(grid, dtau, (0.85, 150.0))
sigmas = [0.0, 1.0 / 6.0, 0.25, 0.49]
kinds = [HomSobolev(s) for s in sigmas]

v = Field(eps0.copy(), grid, "physical")
print("linear-only evolution of incoming chirp (norms should follow the law)")
print("tau    " + "  ".join(f"Hs{s:5.3f}" for s in sigmas) + "   band|x|>40  |x|<2")
hist = []
for k in range(1, 8001):
    v = flow.strang_step(v, dtau, pp, plan, mask, nonlinear=False)
    if k % 500 == 0:
        row = [norm(v, kd) for kd in kinds]
        a = np.abs(v.values)
        hist.append((k * dtau, row))
        print(f"{k*dtau:5.2f}  " + "  ".join(f"{r:9.3e}" for r in row)
              + f"   {a[np.abs(x) > 40].max():8.1e}  {a[np.abs(x) < 2].max():8.1e}")
arr = np.array([[t] + r for t, r in hist])
for j, s in enumerate(sigmas):
    m = (arr[:, 0] >= 0.5) & (arr[:, 0] <= 5.5)
    sl = np.polyfit(arr[m, 0], np.log(arr[m, j + 1]), 1)[0]
    pred = -b * (s - 1.0 / 6.0)
    print(f"sigma={s:5.3f}  slope [0.5,5.5] {sl:+.4f}   law {pred:+.4f}")
