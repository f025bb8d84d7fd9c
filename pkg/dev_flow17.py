import sys
import time
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D, RadialGrid
from ssnls import flow, linop
from ssnls.spectral import HomSobolev, norm

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.49)

t0 = time.time()
grid = Grid1D(2**18, 512.0)
Qg = flow.profile_on_grid(prof, grid, method="ode")
print(f"[profile resample: {time.time()-t0:.1f}s]  Q(0)={np.abs(Qg.values).max():.6f}")

rg = RadialGrid(1024, 32.0)
H = linop.assemble_H(prof, grid=rg)
eigs = linop.discrete_spectrum(H, (-3 - 3j, 3 + 3j))
P_disc, P_ess = linop.riesz_projections(eigs)
parity = flow.make_parity_projector(grid)
pair = flow.make_pair_projector(P_ess, rg, grid)
gauge = flow.make_gauge_projector([1j * Qg.values], grid, window=0.6 * grid.L)
proj = flow.compose_projectors(parity, pair, gauge)

sig = HomSobolev(pp.sigma)
eps0 = proj(flow.incoming_chirp(grid, b, 350.0, 70.0))
eps0 = Field(eps0.values * (0.999e-3 * norm(Qg, sig) / norm(eps0, sig)),
             grid, "physical")
print(f"||eps0||_sig/||Q||_sig = {norm(eps0, sig)/norm(Qg, sig):.3e}"
      f"   amp {np.abs(eps0.values).max():.3e}")

cfg = flow.FlowConfig(dtau=5e-3, tau_end=13.55, sponge=(0.85, 150.0),
                      cadence=50, window_frac=0.6, stabilize_every=50)
t1 = time.time()
series, fit = flow.perturbation_experiment(prof, eps0, cfg, pp,
                                           stabilizer=proj, resample="ode",
                                           skip_frac=0.01)
wall = time.time() - t1
law = -b * (pp.sigma - pp.s_c)
need = 3.0 / (b * (pp.sigma - pp.s_c))
wlen = fit.window[1] - fit.window[0]
print(f"[experiment wall: {wall/60:.1f} min]")
print(f"slope {fit.slope:+.4f}   law {law:+.4f}   ratio {fit.slope/law:.3f}")
print(f"window {fit.window}  len {wlen:.2f}  (need >= {need:.2f})")
print(f"r2 {fit.r_squared:.4f}   ci {fit.ci}   flags {fit.flags}")
print(f"runtime ok: {wall <= 1200.0}")

ts, ys = series.taus, series.hsigma_eps
for lo, hi in [(0.25, 4), (4, 7.3), (7.3, 10), (10, 13.55)]:
    m = (ts >= lo) & (ts <= hi) & (ys > 0)
    if m.sum() >= 3:
        sl = np.polyfit(ts[m], np.log(ys[m]), 1)[0]
        print(f"  segment [{lo:5.2f},{hi:5.2f}]  slope {sl:+.4f}  ratio {sl/law:.3f}")
for i in range(0, len(ts), 10):
    print(f"  tau={ts[i]:6.2f}  diff {ys[i]:.4e}")
print(f"  tau={ts[-1]:6.2f}  diff {ys[-1]:.4e}")
