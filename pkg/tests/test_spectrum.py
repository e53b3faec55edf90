import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopmag.couplings import build_coupling_matrices, coupling_Gamma, coupling_J
from coopmag.errors import SingularPoint
from coopmag.spectrum import (
    band_structure_grid,
    band_structure_poisson,
    band_structure_sum,
    decay_rate_sweep,
    effective_hamiltonian,
    light_cone_phases,
    single_excitation_modes,
    zone_average_poisson,
)


def _spectrum(cfg, positions):
    C = build_coupling_matrices(positions, cfg).in_units_of_gamma0()
    H = effective_hamiltonian(C)
    return C, H, single_excitation_modes(H)


def test_single_qubit_hamiltonian(cfg):
    C = build_coupling_matrices([0.0], cfg)
    H = effective_hamiltonian(C)
    assert H.matrix.shape == (1, 1) and H.matrix[0, 0] == -1j * C.gamma0


def test_two_qubit_hamiltonian_and_modes(cfg):
    a = 0.6
    C = build_coupling_matrices([0.0, a], cfg)
    H = effective_hamiltonian(C).matrix
    j12, g12, g0 = coupling_J(a, cfg), coupling_Gamma(a, cfg), C.gamma0
    assert H[0, 0] == H[1, 1] == -1j * g0
    assert H[0, 1] == H[1, 0] == j12 - 1j * g12
    s = single_excitation_modes(effective_hamiltonian(C))
    expected = sorted([j12 - 1j * (g0 + g12), -j12 - 1j * (g0 - g12)], key=lambda e: -e.imag)
    assert s.eigenvalues == pytest.approx(expected, rel=1e-12)
    # symmetric state is the superradiant one when g12 > 0
    sym = np.array([1, 1]) / math.sqrt(2)
    assert g12 > 0
    assert abs(np.vdot(sym, s.right_eigenvectors[:, 1])) == pytest.approx(1.0, rel=1e-12)


def test_offset_frame(cfg):
    C = build_coupling_matrices([0.0, 0.4, 0.9], cfg)
    s0 = single_excitation_modes(effective_hamiltonian(C))
    s1 = single_excitation_modes(effective_hamiltonian(C, omega_offset=5.0))
    assert s1.shifts == pytest.approx(s0.shifts + 5.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_chain_properties(cfg, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 41))
    pos = np.cumsum(rng.uniform(0.05, 1.5, n))
    C, H, s = _spectrum(cfg, pos)
    assert np.array_equal(H.matrix, H.matrix.T)
    g = s.decay_rates
    assert np.all(np.diff(g) >= 0)
    assert np.all(g >= -1e-12)
    assert math.fsum(g) == pytest.approx(n, rel=1e-10)
    assert s.residual <= 1e-10
    assert np.allclose(np.linalg.norm(s.right_eigenvectors, axis=0), 1.0, atol=1e-13)
    # left eigenvectors: L^dagger H = E L^dagger and L^dagger R = 1
    L = s.left_eigenvectors()
    lhs = L.conj().T @ H.matrix
    assert np.allclose(lhs, s.eigenvalues[:, None] * L.conj().T, atol=1e-9)
    assert np.allclose(np.einsum("im,im->m", L.conj(), s.right_eigenvectors), 1.0, atol=1e-9)


def test_subradiant_mode_dense_chain(cfg):
    c = cfg.with_lattice(0.1, 40)
    _, _, s = _spectrum(c, c.positions())
    assert s.decay_rates[0] < 1e-2


def test_subradiance_threshold_sweep(cfg):
    a = np.array([0.2, 1.0, 2.0, 2.5, 3.0, 3.3, 4.0, 5.0])
    sw = decay_rate_sweep(a, 40, cfg)
    below, above = sw["min_decay"][a < 2.6], sw["min_decay"][a > math.pi]
    assert below.max() < 1e-2 and above.min() > 0.3
    assert sw["sum_decay"] == pytest.approx(40.0 * np.ones_like(a), rel=1e-10)


# -- bands ------------------------------------------------------------------------


def test_band_evenness(cfg):
    ka = np.array([0.3, 1.1, 2.7])
    p = band_structure_sum(ka, 0.5, cfg, n_max=2000)
    m = band_structure_sum(-ka, 0.5, cfg, n_max=2000)
    assert np.array_equal(p.Gamma_k, m.Gamma_k) and np.array_equal(p.J_k, m.J_k)
    q = band_structure_poisson(ka, 0.5)
    assert np.array_equal(q.Gamma_k, band_structure_poisson(-ka, 0.5).Gamma_k)


def test_poisson_against_frozen_oracle(frozen):
    for ka, a, ref in frozen["poisson"]:
        assert band_structure_poisson(ka, a).Gamma_k[0] == pytest.approx(ref, rel=1e-13, abs=1e-15)


def _regular_phases(a):
    ka = np.linspace(-math.pi, math.pi, 2001)
    return ka[np.all(np.abs(ka[:, None] - light_cone_phases(a)[None, :]) > 1e-6, axis=1)]


def test_poisson_dark_window_below_threshold():
    # for a/lambda < pi, phases with |ka| > a/lambda have no image in the light cone
    g = band_structure_poisson(_regular_phases(0.5), 0.5).Gamma_k
    assert np.any(g == 0.0) and np.all(g >= 0.0)
    g = band_structure_poisson(_regular_phases(4.0), 4.0).Gamma_k
    assert np.all(g > 0.0)


@pytest.mark.xfail(strict=True, reason="above a/lambda = pi the m = 0 image is always inside the light cone")
def test_poisson_dark_window_stated_above_threshold():
    g = band_structure_poisson(_regular_phases(4.0), 4.0).Gamma_k
    assert np.any(g == 0.0)


def test_poisson_singular_point():
    with pytest.raises(SingularPoint):
        band_structure_poisson(0.5, 0.5)  # |k lambda| = 1 exactly


def test_sum_matches_poisson_at_zone_centre(cfg):
    s = band_structure_sum(0.0, 0.1, cfg, n_max=100_000)
    p = band_structure_poisson(0.0, 0.1)
    assert s.Gamma_k[0] == pytest.approx(p.Gamma_k[0], rel=1e-3)


def test_beyond_light_line_decouples(cfg):
    # at ka = 2 with a/lambda = 0.1, |k lambda| = 20: the tapered sum falls toward 0
    vals = [abs(band_structure_sum(2.0, 0.1, cfg, n_max=n).Gamma_k[0]) for n in (1000, 10_000, 100_000)]
    assert vals[-1] < 1e-3 and vals[-1] < vals[0]


def test_zone_average():
    for a in (0.1, 1.0, 4.0):
        assert zone_average_poisson(a) == pytest.approx(1.0, abs=1e-10)


def test_grid_matches_direct_sum(cfg):
    grid = band_structure_grid(4096, 0.7, cfg, n_max=1000)
    pick = np.array([100, 1500, 2048, 3000])
    direct = band_structure_sum(grid.ka[pick], 0.7, cfg, n_max=1000)
    assert grid.Gamma_k[pick] == pytest.approx(direct.Gamma_k, abs=1e-11)
    assert grid.J_k[pick] == pytest.approx(direct.J_k, abs=1e-11)
