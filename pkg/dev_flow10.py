import sys
import time
import numpy as np

sys.path.insert(0, "src")

from ssnls.params import derive_params
from ssnls.profile import load_profile
from ssnls.grids import Field, Grid1D, RadialGrid
from ssnls import flow, linop
from ssnls.propagator import PropagatorPlan
from ssnls.spectral import windowed_norm, HomSobolev

prof = load_profile("/tmp/dev_profile_d1p7.txt")
b = prof.b_star
pp = derive_params(1, 7.0, b, 0.25)

t0 = time.time()
rg = RadialGrid(1024, 32.0)
H = linop.assemble_H(prof, grid=rg)
eigs = linop.discrete_spectrum(H, (-3 - 3j, 3 + 3j))
idx = eigs.tagged()
print("tagged:", np.sort_complex(np.round(eigs.eigenvalues[idx], 6)))
P_disc, P_ess = linop.riesz_projections(eigs)
print(f"[linop build {time.time()-t0:.1f}s]")

def run(N, L, stab, gamma=150.0, dtau=1e-3, tau_end=7.08, K=25):
    grid = Grid1D(N, L)
    Q = flow.profile_on_grid(prof, grid, method="ode")
    chi = flow.edge_taper(grid)
    v0 = np.ascontiguousarray(Q.values * chi)
    cap = 0.6 * L
    plan = PropagatorPlan(grid, b)
    mask = flow.sponge_mask(grid, dtau, (0.85, gamma))
    base = windowed_norm(Field(v0, grid, "physical"), cap, HomSobolev(pp.sigma))
    proj = None
    if stab:
        parity = flow.make_parity_projector(grid)
        pair = flow.make_pair_projector(P_ess, rg, grid)
        gauge = flow.make_gauge_projector([1j * v0], grid, window=cap)
        proj = flow.compose_projectors(parity, pair, gauge)
    v = Field(v0.copy(), grid, "physical")
    n = int(round(tau_end / dtau))
    print(f"--- N={N} L={L} stab={stab}  ||Q||_w={base:.4f}")
    t0 = time.time()
    worst = 0.0
    for k in range(1, n + 1):
        v = flow.strang_step(v, dtau, pp, plan, mask)
        if proj is not None and k % K == 0:
            eps = Field(v.values - v0, grid, "physical")
            eps = proj(eps)
            v = Field(v0 + eps.values, grid, "physical")
        if k % (n // 10) == 0 or k == n:
            dw = windowed_norm(Field(v.values - v0, grid, "physical"), cap,
                               HomSobolev(pp.sigma)) / base
            worst = max(worst, dw)
            print(f"  tau={k*dtau:5.2f}  rel win-drift {dw:9.3e}")
    print(f"  sup rel drift {worst:.3e}   [{time.time()-t0:.1f}s]")

run(8192, 48.0, True)
