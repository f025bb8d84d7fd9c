"""Linearized pair-operator assembly, resonance identity, spectrum filter."""

import dataclasses

import numpy as np
import pytest

from ssnls import linop
from ssnls.grids import RadialGrid


# ---------------------------------------------------------------------------
# stencils


def test_stencil_consistency_second_order():
    # gaussian closed forms: Lap u = (r^2 - d) u, (d/2 + r d/dr) u = (d/2 - r^2) u
    for d in (1, 3):
        errs = []
        for N in (256, 512):
            g = RadialGrid(N, 10.0)
            u = np.exp(-0.5 * g.r ** 2)
            L = linop.laplacian_matrix(g, d)
            K = linop.dilation_matrix(g, d)
            el = np.max(np.abs(L @ u - (g.r ** 2 - d) * u)[: N - 4])
            ek = np.max(np.abs(K @ u - (0.5 * d - g.r ** 2) * u)[: N - 4])
            errs.append((el, ek))
        assert 3.5 < errs[0][0] / errs[1][0] < 4.5
        assert 3.5 < errs[0][1] / errs[1][1] < 4.5


def test_volume_similarity_structure():
    # d=1 blocks are Hermitian in the volume inner product away from the
    # closure rows; the dirichlet row keeps the structure exactly
    g = RadialGrid(256, 12.0)
    V = linop.cell_volumes(g, 1)
    P = np.diag(np.sqrt(V))
    Pi = np.diag(1.0 / np.sqrt(V))
    for cl, full_ok in (("dirichlet", True), ("one-sided", False)):
        M = P @ linop.deformed_block(g, 1, 1.0, cl) @ Pi
        dev = np.abs(M - M.conj().T)
        assert dev[:-2][:, :-2].max() < 1e-11
        assert (dev.max() < 1e-11) == full_ok


def test_free_spectrum_reality_by_closure():
    g = RadialGrid(256, 12.0)
    ev_d = np.linalg.eigvals(linop.deformed_block(g, 1, 1.0, "dirichlet"))
    assert np.max(np.abs(ev_d.imag)) < 1e-10
    # the one-sided row is non-normal and scatters most of the spectrum;
    # this is the documented dominant artifact of that closure
    ev_o = np.linalg.eigvals(linop.deformed_block(g, 1, 1.0, "one-sided"))
    assert np.median(np.abs(ev_o.imag)) > 0.5


def test_bad_closure_and_dimension_rejected():
    g = RadialGrid(64, 8.0)
    with pytest.raises(ValueError, match="closure"):
        linop.laplacian_matrix(g, 1, closure="periodic")
    with pytest.raises(ValueError, match="d must be"):
        linop.laplacian_matrix(g, 4)


# ---------------------------------------------------------------------------
# assembly structure


def test_block_pattern(profile_d1p7):
    g = RadialGrid(128, 12.0)
    H = linop.assemble_H(profile_d1p7, grid=g)
    n = g.N
    A = H.matrix
    assert np.all(np.isfinite(A))
    par = profile_d1p7.params
    Db = linop.deformed_block(g, par.d, profile_d1p7.b_star)
    shift = 1j * profile_d1p7.b_star * par.s_c * np.eye(n)
    assert np.array_equal(A[:n, n:], np.diag(H.W2))
    assert np.array_equal(A[n:, :n], np.diag(-np.conj(H.W2)))
    assert np.array_equal(A[:n, :n], Db - np.eye(n) + np.diag(H.W1) - shift)
    assert np.array_equal(A[n:, n:],
                          -np.conj(Db) + np.eye(n) - np.diag(H.W1) - shift)
    assert np.max(np.abs(H.W1.imag)) == 0.0  # W1 is real


def test_assembly_linearity_in_potentials(profile_d1p7):
    g = RadialGrid(128, 12.0)
    H = linop.assemble_H(profile_d1p7, grid=g)
    F = linop.assemble_free(g, 1, profile_d1p7.b_star,
                            profile_d1p7.params.s_c)
    n = g.N
    D = H.matrix - F.matrix
    pot = np.zeros_like(D)
    pot[:n, :n] = np.diag(H.W1)
    pot[:n, n:] = np.diag(H.W2)
    pot[n:, :n] = np.diag(-np.conj(H.W2))
    pot[n:, n:] = -np.diag(H.W1)
    # off-diagonal blocks are placed, not computed: exact
    assert np.array_equal(D[:n, n:], pot[:n, n:])
    assert np.array_equal(D[n:, :n], pot[n:, :n])
    # diagonal blocks cancel 1/h^2 entries, so sub-ulp taper values wash out
    assert np.allclose(D, pot, rtol=0.0, atol=1e-12)


def test_free_b0_decoupled_blocks():
    # W = 0, b = 0: blocks are +-(Lap -+ 1); spectrum matches the FD
    # Laplacian eigenvalues directly and gaps the interval (-1, 1)
    g = RadialGrid(128, 10.0)
    Hf = linop.assemble_free(g, 1, 0.0, 0.25)
    ev_L = np.linalg.eigvals(linop.laplacian_matrix(g, 1))
    ev_blocks = np.sort_complex(np.concatenate([ev_L - 1.0, -ev_L + 1.0]))
    ev_H = np.sort_complex(np.linalg.eigvals(Hf.matrix))
    assert np.max(np.abs(ev_blocks - ev_H)) < 1e-4
    assert np.median(np.abs(ev_H.imag)) < 1e-8
    assert np.min(np.abs(ev_H.real)) > 1.0 - 1e-4


def test_conjugation_rigid_shift(profile_d1p7):
    g = RadialGrid(128, 12.0)
    sig = 0.25
    Hp = linop.assemble_H(profile_d1p7, grid=g, sigma=sig)
    Hc = linop.assemble_H(profile_d1p7, grid=g, sigma=sig, conjugated=True)
    shift = 1j * profile_d1p7.b_star * sig * np.eye(2 * g.N)
    assert np.max(np.abs(Hc.matrix - Hp.matrix - shift)) < 1e-12
    # spectra translate rigidly
    ep = np.sort_complex(np.linalg.eigvals(Hp.matrix))
    ec = np.sort_complex(np.linalg.eigvals(Hc.matrix))
    assert np.max(np.abs(ec - ep - 1j * profile_d1p7.b_star * sig)) < 1e-8


def test_coarse_tail_warning(profile_d1p7):
    with pytest.warns(RuntimeWarning, match="points per oscillation"):
        H = linop.assemble_H(profile_d1p7, grid=RadialGrid(16, 16.0))
    assert H.coarse_tail
    H = linop.assemble_H(profile_d1p7, grid=RadialGrid(512, 16.0))
    assert not H.coarse_tail


# ---------------------------------------------------------------------------
# resonance identity


def test_resonance_residual_and_refinement(profile_d1p7):
    res = {}
    for N in (512, 1024):
        H = linop.assemble_H(profile_d1p7, grid=RadialGrid(N, 16.0))
        res[N] = linop.resonance_residual(H, profile_d1p7)
    assert res[1024] < 5e-5          # measured 3.18e-5
    assert 3.3 < res[512] / res[1024] < 4.7   # second-order refinement


def test_resonance_bump_sensitivity(profile_d1p7):
    prof = profile_d1p7
    bumped = dataclasses.replace(prof, Q=1.01 * prof.Q,
                                 Qprime=1.01 * prof.Qprime)
    g = RadialGrid(1024, 16.0)
    r0 = linop.resonance_residual(linop.assemble_H(prof, grid=g), prof)
    rb = linop.resonance_residual(linop.assemble_H(bumped, grid=g), bumped)
    assert rb / r0 > 100.0           # measured ~1.3e3; spec floor is 10x


def test_resonance_input_validation(profile_d1p7):
    g = RadialGrid(128, 12.0)
    Hc = linop.assemble_H(profile_d1p7, grid=g, conjugated=True)
    with pytest.raises(ValueError, match="unconjugated"):
        linop.resonance_residual(Hc, profile_d1p7)
    H = linop.assemble_H(profile_d1p7, grid=g)
    zero = dataclasses.replace(profile_d1p7, Q=0.0 * profile_d1p7.Q,
                               Qprime=0.0 * profile_d1p7.Qprime)
    with pytest.raises(ValueError, match="zero"):
        linop.resonance_residual(H, zero)


# ---------------------------------------------------------------------------
# spectrum


def test_essential_line_free_conjugated():
    # zero potential, conjugated at sigma > s_c: no discrete modes, and the
    # continuum estimates sit on Im z = b (sigma - s_c)
    b, s_c, sig = 1.0, 1.0 / 6.0, 0.45
    g = RadialGrid(256, 12.0)
    H = linop.assemble_free(g, 1, b, s_c, sigma=sig, conjugated=True,
                            closure="dirichlet")
    es = linop.discrete_spectrum(H, (-60 - 3j, 60 + 3j))
    line = b * (sig - s_c)
    dev = np.abs(es.eigenvalues.imag - line)
    assert np.median(dev) < 0.2 * line     # measured ~1e-13
    assert len(es.tagged()) == 0
    assert es.near_zero is None


def test_essential_line_onesided_scatter():
    # same configuration under the one-sided closure: placement is polluted
    b, s_c, sig = 1.0, 1.0 / 6.0, 0.45
    g = RadialGrid(256, 12.0)
    H = linop.assemble_free(g, 1, b, s_c, sigma=sig, conjugated=True)
    es = linop.discrete_spectrum(H, (-60 - 3j, 60 + 3j))
    dev = np.abs(es.eigenvalues.imag - b * (sig - s_c))
    assert np.median(dev) > 0.2 * b * (sig - s_c)


WINDOW = (-3.0 - 3.0j, 3.0 + 3.0j)


def test_discrete_modes_d1p7(profile_d1p7):
    # four localized purely imaginary modes with the structure-preserving
    # closure: two below the continuum line, two above
    H = linop.assemble_H(profile_d1p7, grid=RadialGrid(512, 16.0),
                         closure="dirichlet")
    es = linop.discrete_spectrum(H, WINDOW)
    idx = es.tagged()
    assert len(idx) == 4
    lam = np.sort_complex(es.eigenvalues[idx])
    lam = lam[np.argsort(lam.imag)]
    assert np.max(np.abs(lam.real)) < 1e-6
    ref = np.array([-1.93543066, -1.41284736, 1.17731370, 1.69989700])
    assert np.max(np.abs(lam.imag - ref)) < 1e-5
    # the second one is the time-translation eigenvalue -2ib
    assert abs(lam[1] + 2j * profile_d1p7.b_star) < 5e-4
    assert np.all(es.scores[idx] < 0.02)
    sides = [es.sides[k] for k in idx]
    assert sorted(sides) == ["above", "above", "below", "below"]
    assert es.biorth_residual < 1e-8


def test_discrete_modes_survive_onesided(profile_d1p7):
    # the below-line pair is closure-robust; the stable-side pair hybridizes
    # with the one-sided closure's scattered continuum and fails the filter
    H = linop.assemble_H(profile_d1p7, grid=RadialGrid(512, 16.0))
    es = linop.discrete_spectrum(H, WINDOW)
    idx = es.tagged()
    lam = es.eigenvalues[idx]
    assert len(idx) == 2
    assert np.all(lam.imag < 0)
    assert abs(np.sort(lam.imag)[1] + 2.0 * profile_d1p7.b_star) < 5e-4


def test_near_zero_resonance_recorded(profile_d1p7):
    # the embedded resonance shows up as an approximate eigenvalue at 0
    # whose vector inherits the slow tail, so localization fails
    H = linop.assemble_H(profile_d1p7, grid=RadialGrid(512, 16.0))
    es = linop.discrete_spectrum(H, WINDOW)
    assert es.near_zero is not None
    z, score = es.near_zero
    assert abs(z) < 2e-4             # measured 8.3e-5, refining to 0
    assert score > es.loc_threshold
    k = int(np.argmin(np.abs(es.eigenvalues - z)))
    assert es.tags[k] == "continuum-artifact"


def test_refinement_stability_oracle(profile_d1p7):
    # tagged modes converge; in-window continuum artifacts do not
    e1 = linop.discrete_spectrum(
        linop.assemble_H(profile_d1p7, grid=RadialGrid(384, 16.0),
                         closure="dirichlet"), WINDOW)
    e2 = linop.discrete_spectrum(
        linop.assemble_H(profile_d1p7, grid=RadialGrid(768, 16.0),
                         closure="dirichlet"), WINDOW)
    lam2 = e2.eigenvalues
    t1 = e1.tagged()
    assert len(t1) == 4 and len(e2.tagged()) == 4
    drift_t = [np.min(np.abs(lam2 - e1.eigenvalues[k])) for k in t1]
    assert max(drift_t) < 2e-3       # measured 1.07e-3
    art = [k for k, t in enumerate(e1.tags)
           if t == "continuum-artifact"
           and (-3 <= e1.eigenvalues[k].real <= 3)
           and (-3 <= e1.eigenvalues[k].imag <= 3)]
    drift_a = [np.min(np.abs(lam2 - e1.eigenvalues[k])) for k in art]
    assert np.median(drift_a) > 10.0 * max(drift_t)   # measured 7.8e-2


def test_window_and_size_validation(profile_d1p7):
    H = linop.assemble_H(profile_d1p7, grid=RadialGrid(128, 12.0))
    with pytest.raises(ValueError, match="ordered"):
        linop.discrete_spectrum(H, (3 + 3j, -3 - 3j))
    big = linop.assemble_free(RadialGrid(2049, 16.0), 1, 1.0, 0.25)
    with pytest.raises(ValueError, match="4096"):
        linop.discrete_spectrum(big, WINDOW)


# ---------------------------------------------------------------------------
# J-symmetry and projections


def test_j_symmetry(profile_d1p7):
    H = linop.assemble_H(profile_d1p7, grid=RadialGrid(512, 16.0),
                         closure="dirichlet")
    # S conj(H) S = -H holds exactly for the assembled blocks
    n = H.grid.N
    S = np.zeros((2 * n, 2 * n))
    S[:n, n:] = np.eye(n)
    S[n:, :n] = np.eye(n)
    assert np.max(np.abs(S @ np.conj(H.matrix) @ S + H.matrix)) < 1e-12
    es = linop.discrete_spectrum(H, WINDOW)
    dist = linop.j_symmetry_check(es)
    window_size = abs(WINDOW[1] - WINDOW[0])
    assert dist < 0.01 * window_size
    assert dist < 1e-6               # purely imaginary: self-paired


def test_j_symmetry_empty_set():
    H = linop.assemble_free(RadialGrid(128, 12.0), 1, 1.0, 0.25)
    es = linop.discrete_spectrum(H, WINDOW)
    assert linop.j_symmetry_check(es) == 0.0


def test_riesz_projections(profile_d1p7):
    H = linop.assemble_H(profile_d1p7, grid=RadialGrid(512, 16.0),
                         closure="dirichlet")
    es = linop.discrete_spectrum(H, WINDOW)
    Pd, Pe = linop.riesz_projections(es)
    res = linop.projection_residuals(Pd, H)
    assert res["idempotence"] < 1e-6
    assert res["commutation"] < 1e-4
    assert np.linalg.matrix_rank(Pd, tol=1e-6) == len(es.tagged())
    assert np.max(np.abs(Pd + Pe - np.eye(2 * H.grid.N))) < 1e-12
    # P_ess annihilates the tagged right vectors
    for k in es.tagged():
        v = es.right[:, k]
        assert np.linalg.norm(Pe @ v) < 1e-6


def test_riesz_empty_tagged():
    H = linop.assemble_free(RadialGrid(128, 12.0), 1, 1.0, 0.25)
    es = linop.discrete_spectrum(H, WINDOW)
    Pd, Pe = linop.riesz_projections(es)
    assert np.array_equal(Pd, np.zeros_like(Pd))
    assert np.array_equal(Pe, np.eye(2 * 128, dtype=complex))


# ---------------------------------------------------------------------------
# serialization


def test_eigenset_text(profile_d1p7):
    H = linop.assemble_H(profile_d1p7, grid=RadialGrid(128, 12.0))
    es = linop.discrete_spectrum(H, WINDOW)
    txt = linop.eigenset_to_text(es)
    lines = txt.strip().split("\n")
    body = [ln for ln in lines if not ln.startswith("#")]
    assert len(body) == 2 * 128
    re, im, score, tag = body[0].split()
    float(re), float(im)
    assert 0.0 <= float(score) <= 1.0
    assert tag in ("discrete", "continuum-artifact")
    assert lines[0].startswith("# spectrum rows:")
