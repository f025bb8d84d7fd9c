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
v0 = Field(Q.values * chi, grid, "physical")
mid = np.abs(grid.x) < 18.0

xi = grid.xi


def rhs_spectral(vals):
    vh = grid.to_freq(vals)
    lap = grid.from_freq(-xi ** 2 * vh)
    dv = grid.from_freq(1j * xi * vh)
    Db = lap + 1j * b * (0.5 * vals + grid.x * dv)
    return 1j * ((Db - (1.0 + 1j * b * pp.s_c) * vals) + vals * np.abs(vals) ** 6)


def rhs_lin_spectral(vals):
    vh = grid.to_freq(vals)
    lap = grid.from_freq(-xi ** 2 * vh)
    dv = grid.from_freq(1j * xi * vh)
    Db = lap + 1j * b * (0.5 * vals + grid.x * dv)
    return 1j * (Db - (1.0 + 1j * b * pp.s_c) * vals)


# gaussian data first: linear substep derivative vs spectral generator
g = Field(np.exp(-grid.x ** 2) * np.exp(0.5j * grid.x), grid, "physical")
for h in [1e-3, 1e-4, 1e-5]:
    w = flow.linear_substep(g, h, pp)
    dnum = (w.values - g.values) / h
    dref = rhs_lin_spectral(g.values)
    err = np.abs(dnum - dref)[mid].max() / np.abs(dref)[mid].max()
    print(f"gaussian lin substep derivative h={h}: rel err {err:.3e}")

# full strang derivative at tapered profile: should be ~0 in interior
h = 1e-4
w = flow.strang_step(v0, h, pp, None, None)
dnum = (w.values - v0.values) / h
dref = rhs_spectral(v0.values)
print("strang deriv at v0: interior max |dnum|", np.abs(dnum[mid]).max())
print("rhs spectral at v0: interior max       ", np.abs(dref[mid]).max())
print("difference interior max                ", np.abs(dnum - dref)[mid].max())
i = np.argmax(np.abs(dnum[mid]))
xs = grid.x[mid]
print("largest step-derivative at x =", xs[i])
# decompose: linear substep derivative on v0
wl = flow.linear_substep(v0, h, pp)
dl = (wl.values - v0.values) / h
dlref = rhs_lin_spectral(v0.values)
print("lin-only: max interior |dl - dlref|", np.abs(dl - dlref)[mid].max(),
      " |dlref| max", np.abs(dlref[mid]).max())
