import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopmag.bath import (
    chi_minus_plus,
    chi_plus_minus,
    chi_zz,
    dispersion_omega_f,
    probe_grid,
    spin_wave_gap,
)
from coopmag.errors import MissingTransportParameters
from coopmag.params import HBAR, Environment, LongitudinalTransport, derive_scales


@pytest.fixture(scope="module")
def transport_bath(preset):
    bath = preset[0]
    tr = LongitudinalTransport(spin_conductivity_sigma=2.0e-3, spin_relaxation_tau_s=1e-6,
                               static_susceptibility_chi0=5.0e-2)
    return dataclasses.replace(bath, longitudinal=tr)


def test_gap_at_zero_k(preset, scales):
    bath, qubits, env = preset
    assert dispersion_omega_f(0.0, bath, env, qubits) == pytest.approx(scales.gap_DeltaF, rel=1e-14)
    assert spin_wave_gap(bath, env, qubits) == pytest.approx(scales.gap_DeltaF, rel=1e-14)


def test_light_line_touches_qubit_frequency(preset, scales):
    bath, qubits, env = preset
    w = dispersion_omega_f(1.0 / scales.lambda_, bath, env, qubits)
    assert w == pytest.approx(scales.omega_qi, rel=1e-12)


def test_zone_edge_at_threshold_lattice(preset, scales):
    # a = pi lambda puts k = pi/a exactly on the light line
    bath, qubits, env = preset
    a = math.pi * scales.lambda_
    assert dispersion_omega_f(math.pi / a, bath, env, qubits) == pytest.approx(scales.omega_qi, rel=1e-12)


def test_chi_minus_plus_on_resonance(preset, scales):
    bath, qubits, env = preset
    w = scales.omega_qi
    val = chi_minus_plus(w, 1.0 / scales.lambda_, bath, env, qubits)
    expected = 1j * bath.surface_spin_density_s / (bath.gilbert_alpha * w)
    assert val.real == pytest.approx(0.0, abs=1e-9 * abs(expected))
    assert val.imag == pytest.approx(expected.imag, rel=1e-6)


def test_chi_minus_plus_undamped_limit(preset, scales):
    bath, qubits, env = preset
    bath0 = dataclasses.replace(bath, gilbert_alpha=1e-300)
    k = 3.0 / scales.lambda_
    w = scales.omega_qi
    dh = bath.spin_stiffness_D / HBAR
    expected = bath.surface_spin_density_s / (dh * (k * k - 1.0 / scales.lambda_**2))
    val = chi_minus_plus(w, k, bath0, env, qubits)
    assert val.real == pytest.approx(expected, rel=1e-12)
    assert abs(val.imag) < 1e-12 * abs(expected)


def test_chi_minus_plus_peaks_on_light_line(preset, scales):
    bath, qubits, env = preset
    ks = np.linspace(0.0, 3.0, 30001) / scales.lambda_
    mag = np.abs(chi_minus_plus(scales.omega_qi, ks, bath, env, qubits))
    assert ks[np.argmax(mag)] * scales.lambda_ == pytest.approx(1.0, abs=2e-4)


def test_chi_plus_minus_examples(preset, scales):
    bath, qubits, env = preset
    w = scales.omega_qi
    dh = bath.spin_stiffness_D / HBAR
    k0 = chi_plus_minus(w, 0.0, bath, env, qubits)
    expected = bath.surface_spin_density_s / (dh / scales.lambda_prime**2 - 1j * bath.gilbert_alpha * w)
    assert k0 == pytest.approx(expected, rel=1e-12)
    ks = np.linspace(0.0, 50.0, 2001) / scales.lambda_
    vals = chi_plus_minus(w, ks, bath, env, qubits)
    assert np.all(np.isfinite(vals))
    assert np.max(np.abs(vals)) <= abs(k0) * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.0, 5.0))
def test_plus_minus_is_reflected_minus_plus(preset, scales, w_rel, k_rel):
    bath, qubits, env = preset
    w, k = w_rel * scales.omega_qi, k_rel / scales.lambda_
    a = chi_plus_minus(w, k, bath, env, qubits)
    b = np.conj(chi_minus_plus(-w, k, bath, env, qubits))
    assert a == pytest.approx(b, rel=1e-13)


def test_damping_sign(preset, scales):
    bath, qubits, env = preset
    ks = np.linspace(0.0, 5.0, 501) / scales.lambda_
    for w in scales.omega_qi * np.array([0.5, 1.0, 2.0]):
        assert np.all(np.imag(chi_minus_plus(w, ks, bath, env, qubits)) > 0)


def test_chi_zz(preset, transport_bath):
    tr = transport_bath.longitudinal
    chi0 = tr.static_susceptibility_chi0
    for k in (0.0, 1e4, 1e6):
        assert chi_zz(0.0, k, transport_bath) == chi0
    assert chi_zz(1e9, 1e12, transport_bath) == pytest.approx(chi0, rel=1e-6)
    # at omega chi0 / sigma = l_s^-2 + k^2 the value is chi0 / (1 - i)
    k = 2e5
    q2 = tr.diffusion_length**-2 + k * k
    w = q2 * tr.spin_conductivity_sigma / chi0
    direct = chi0 * q2 / complex(q2, -w * chi0 / tr.spin_conductivity_sigma)
    assert chi_zz(w, k, transport_bath) == pytest.approx(direct, rel=1e-14)
    assert chi_zz(w, k, transport_bath) == pytest.approx(chi0 * (1 + 1j) / 2, rel=1e-14)
    with pytest.raises(MissingTransportParameters):
        chi_zz(1.0, 1.0, preset[0])


def test_probe_grid(preset, scales):
    bath, qubits, env = preset
    pts = probe_grid("minus_plus", [scales.omega_qi], [0.0, 1.0 / scales.lambda_], bath, env, qubits)
    assert len(pts) == 2 and all(np.isfinite(p.value) for p in pts)


def test_field_entry(preset, scales):
    bath, qubits, _ = preset
    env = Environment(applied_field_B0=scales.field_B0)
    assert spin_wave_gap(bath, env) == pytest.approx(scales.gap_DeltaF, rel=1e-12)
