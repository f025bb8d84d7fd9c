import numpy as np
import pytest

from ssnls import Field, Grid1D, RadialGrid, VectorField2


@pytest.fixture
def grid():
    return Grid1D(256, 12.0)


def test_grid_geometry(grid):
    assert grid.dx == pytest.approx(2 * 12.0 / 256)
    assert grid.dxi == pytest.approx(np.pi / 12.0)
    assert grid.x[0] == -12.0 and grid.x[-1] == pytest.approx(12.0 - grid.dx)
    assert grid.xi_max == pytest.approx(np.pi / grid.dx)
    # fft-ordered dual grid: xi[1] - xi[0] = dxi
    assert grid.xi[1] - grid.xi[0] == pytest.approx(grid.dxi)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(100, 12.0)   # not a power of two
    with pytest.raises(ValueError):
        Grid1D(8, 12.0)     # too small
    with pytest.raises(ValueError):
        Grid1D(64, 0.0)
    with pytest.raises(ValueError):
        Grid1D(64, np.inf)


def test_transform_roundtrip(grid):
    rng = np.random.default_rng(11)
    u = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
    back = grid.from_freq(grid.to_freq(u))
    assert np.max(np.abs(back - u)) < 1e-12


def test_plancherel(grid):
    rng = np.random.default_rng(12)
    u = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
    lhs = grid.dx * np.sum(np.abs(u) ** 2)
    rhs = grid.dxi / (2 * np.pi) * np.sum(np.abs(grid.to_freq(u)) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_transform_matches_continuum(grid):
    # e^{-x^2/2} has continuum transform sqrt(2 pi) e^{-xi^2/2}
    u = np.exp(-grid.x ** 2 / 2)
    uhat = grid.to_freq(u)
    exact = np.sqrt(2 * np.pi) * np.exp(-grid.xi ** 2 / 2)
    assert np.max(np.abs(uhat - exact)) < 1e-12


def test_field_validation(grid):
    with pytest.raises(ValueError):
        Field(np.zeros(grid.N + 1), grid)
    bad = np.zeros(grid.N, dtype=complex)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        Field(bad, grid)
    with pytest.raises(ValueError):
        Field(np.zeros(grid.N), grid, space="fourier")
    f = Field(np.ones(grid.N), grid)
    assert f.values.dtype == np.complex128
    g = f.copy()
    g.values[0] = 5.0
    assert f.values[0] == 1.0


def test_radial_grid():
    rg = RadialGrid(101, 25.0)
    assert rg.r[0] == 0.0
    assert rg.r[-1] == pytest.approx(25.0)
    assert rg.dr == pytest.approx(0.25)
    with pytest.raises(ValueError):
        RadialGrid(4, 25.0)
    with pytest.raises(ValueError):
        RadialGrid(64, -1.0)


def test_vector_field_symmetry_defect():
    rng = np.random.default_rng(13)
    z = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    pair = VectorField2(z, np.conj(z))
    assert pair.symmetry_defect() == 0.0
    off = VectorField2(z, np.conj(z) + 0.1)
    assert off.symmetry_defect() > 0.0
    assert pair.stack().shape == (64,)
    with pytest.raises(ValueError):
        VectorField2(z, z[:16])
