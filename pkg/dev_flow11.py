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

rg = RadialGrid(1024, 32.0)
H = linop.assemble_H(prof, grid=rg)
eigs = linop.discrete_spectrum(H, (-3 - 3j, 3 + 3j))
idx = eigs.tagged()
print("tagged:", eigs.eigenvalues[idx])
print("biorth residual:", eigs.biorth_residual)
V = H.volumes()
VV = np.concatenate([V, V])
for i in idx:
    vr = eigs.right[:, i]
    vl = eigs.left[:, i]
    # eigenvalue condition number in the volume-weighted inner product
    num = np.sqrt((VV * np.abs(vl) ** 2).sum()) * np.sqrt((VV * np.abs(vr) ** 2).sum())
    den = np.abs((VV * np.conj(vl) * vr).sum())
    print(f"  lam={eigs.eigenvalues[i]:.4f}  cond={num/den:.3e}")

P_disc, P_ess = linop.riesz_projections(eigs)
s = np.linalg.svd(P_disc, compute_uv=False)
print("||P_disc||_2 =", s[0])
