import os
import sys
import time

import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import find_profile, save_profile, load_profile
from ssnls.grids import Field, Grid1D
from ssnls.spectral import HomSobolev, Lp, norm, windowed_norm
from ssnls import flow

CACHE = "/tmp/dev_profile_d1p7.txt"
params = derive_params(1, 7.0, 0.7, 0.25)
if os.path.exists(CACHE):
    prof = load_profile(CACHE)
else:
    t0 = time.time()
    prof = find_profile(params, ((0.84, 1.00), (0.60, 0.80)))
    print(f"profile built in {time.time()-t0:.1f}s  b*={prof.b_star:.12f} Q0={prof.Q0:.12f}")
    save_profile(prof, CACHE)
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)
print(f"b*={b:.12f}  s_c={pp.s_c:.6f}  p_c={pp.p_c}  b(sig-sc)={b*(pp.sigma-pp.s_c):.6f}")

grid = Grid1D(4096, 32.0)
t0 = time.time()
Qi = flow.profile_on_grid(prof, grid, method="interp")
print(f"interp resample {time.time()-t0:.2f}s")
t0 = time.time()
Qo = flow.profile_on_grid(prof, grid, method="ode")
print(f"ode resample {time.time()-t0:.2f}s  interp-vs-ode max diff {np.abs(Qi.values-Qo.values).max():.3e}")

sig = HomSobolev(pp.sigma)
nQ = windowed_norm(Qo, 0.6 * grid.L, sig)
print(f"||Q||_sigma windowed {nQ:.6f}  full {norm(Qo, sig):.6f}")

# substep sanity
v = Field(np.exp(-grid.x**2) * np.exp(1j * grid.x), grid, "physical")
w = flow.nonlinear_substep(v, 0.37, 7.0)
print("NL modulus drift", np.abs(np.abs(w.values) - np.abs(v.values)).max())
w = flow.linear_substep(v, 0.25, pp)
print("lin Hsc iso rel", abs(norm(w, HomSobolev(pp.s_c)) / norm(v, HomSobolev(pp.s_c)) - 1.0))
print("lin Hsig contraction rel",
      abs(norm(w, sig) / (np.exp(-b * (pp.sigma - pp.s_c) * 0.25) * norm(v, sig)) - 1.0))

# step timing
from ssnls.propagator import PropagatorPlan
plan = PropagatorPlan(grid, b)
mask = flow.sponge_mask(grid, 1e-3, (0.85, 1.0))
vv = Qo
t0 = time.time()
for _ in range(200):
    vv = flow.strang_step(vv, 1e-3, pp, plan, mask)
dt_step = (time.time() - t0) / 200
print(f"strang step {dt_step*1e3:.3f} ms -> tau=7.08 at dtau=1e-3 ~ {7080*dt_step:.0f}s")

# fixed-point drift curve, moderate config first
for method, dtau, gamma in [("interp", 1e-3, 1.0), ("ode", 1e-3, 1.0), ("ode", 1e-3, 0.0)]:
    Qg = Qi if method == "interp" else Qo
    cfg = flow.FlowConfig(dtau=dtau, tau_end=7.08, sponge=(0.85, gamma),
                          cadence=max(1, int(round(0.2 / dtau))))
    t0 = time.time()
    ser = flow.evolve(Qg, cfg, pp, reference=Qg)
    rel = ser.hsigma_eps / nQ
    print(f"[{method} dtau={dtau} gamma={gamma}] {time.time()-t0:.0f}s "
          f"sup drift {rel.max():.3e} final {rel[-1]:.3e} aborted={ser.aborted}")
    idx = np.linspace(0, len(ser) - 1, 13).astype(int)
    for i in idx:
        print(f"   tau={ser.taus[i]:6.2f}  drift={rel[i]:.3e}")
