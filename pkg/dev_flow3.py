import sys
import time

import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D
from ssnls.spectral import HomSobolev, norm, windowed_norm
from ssnls import flow

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)
grid = Grid1D(4096, 32.0)
Q = flow.profile_on_grid(prof, grid, method="ode")
chi = flow.edge_taper(grid)
v0 = Field(Q.values * chi, grid, "physical")
sig = HomSobolev(pp.sigma)
nQ = windowed_norm(Q, 0.6 * grid.L, sig)

# tapered fixed point: drift curve for a dtau/gamma ladder
for dtau, gamma, tau_end in [(1e-3, 1.0, 7.08), (1e-3, 0.0, 7.08), (2.5e-4, 1.0, 7.08)]:
    cfg = flow.FlowConfig(dtau=dtau, tau_end=tau_end, sponge=(0.85, gamma),
                          cadence=max(1, int(round(0.2 / dtau))))
    t0 = time.time()
    ser = flow.evolve(v0, cfg, pp, reference=v0)
    rel = ser.hsigma_eps / nQ
    print(f"[dtau={dtau} gamma={gamma}] {time.time()-t0:.0f}s "
          f"sup {rel.max():.3e} final {rel[-1]:.3e}")
    for i in np.linspace(0, len(ser) - 1, 9).astype(int):
        print(f"   tau={ser.taus[i]:6.2f}  drift={rel[i]:.3e}")
