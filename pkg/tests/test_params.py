import dataclasses
import math

import pytest
from hypothesis import given, settings, strategies as st

from coopmag.couplings import coupling_Gamma
from coopmag.errors import GapExceedsQubitFrequency, NonPositiveParameter
from coopmag.params import (
    HBAR,
    K_B,
    BathSpec,
    Environment,
    bose_occupation,
    derive_scales,
    dimensionless_config,
    get_preset,
)
from coopmag.errors import ConfigValidation

NM = 1e-7


def test_lambda_from_preset(scales):
    assert scales.lambda_ == pytest.approx(80 * NM, rel=0.05)
    # omega_F(1/lambda) = omega_qi is the defining identity
    d_over_hbar = 4.3e-30 / HBAR
    assert d_over_hbar / scales.lambda_**2 + scales.gap_DeltaF == pytest.approx(scales.omega_qi, rel=1e-12)


def test_length_ordering(scales):
    assert scales.lambda_prime < scales.lambda_exc < scales.lambda_


def test_zero_detuning_rejected(preset):
    bath, qubits, _ = preset
    with pytest.raises(GapExceedsQubitFrequency):
        derive_scales(bath, qubits, Environment(detuning=0.0))


@settings(max_examples=30, deadline=None)
@given(st.floats(1e5, 1e8), st.floats(1.01, 10.0))
def test_lambda_grows_as_detuning_shrinks(preset, detuning, factor):
    bath, qubits, _ = preset
    near = derive_scales(bath, qubits, Environment(detuning=detuning))
    far = derive_scales(bath, qubits, Environment(detuning=detuning * factor))
    assert near.lambda_ > far.lambda_


def test_bose_occupation_at_unit_beta():
    # hbar * 2 pi * 2 GHz / k_B = 0.09598 K (0.0959 when truncated)
    assert HBAR * 2 * math.pi * 2e9 / K_B == pytest.approx(0.0959, abs=1e-4)
    assert bose_occupation(1.0) == pytest.approx(0.5820, abs=5e-5)
    assert bose_occupation(math.inf) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 10.0), st.floats(1e-3, 10.0))
def test_bose_occupation_monotone_in_temperature(x1, x2):
    # larger beta hbar omega means lower temperature
    if x1 == x2:
        return
    lo, hi = sorted((x1, x2))
    assert bose_occupation(lo) > bose_occupation(hi) > 0


def test_dimensionless_examples(preset, scales, cfg):
    assert cfg.d_over_lambda == pytest.approx(0.375, rel=0.01)
    bath, qubits, env = preset
    q = dataclasses.replace(qubits, lattice_constant_a=scales.lambda_)
    assert dimensionless_config(scales, q).a_over_lambda == pytest.approx(1.0, rel=1e-15)
    assert list(cfg.with_lattice(0.5, 3).positions()) == [0.0, 0.5, 1.0]


def test_derivation_is_deterministic(preset):
    assert derive_scales(*preset) == derive_scales(*preset)


def test_gamma0_matches_coupling_at_contact(cfg, scales):
    assert scales.gamma0 == pytest.approx(float(coupling_Gamma(0.0, cfg)), rel=1e-12)
    warm = cfg.at_temperature(0.1)
    assert warm.gamma0 == pytest.approx(float(coupling_Gamma(0.0, warm)), rel=1e-12)


def test_invalid_inputs(preset):
    bath, qubits, env = preset
    with pytest.raises(NonPositiveParameter):
        dataclasses.replace(bath, spin_stiffness_D=-1.0)
    with pytest.raises(NonPositiveParameter):
        dataclasses.replace(qubits, n_qubits=0)
    with pytest.raises(NonPositiveParameter):
        Environment(detuning=1.0, temperature_T=-1.0)
    with pytest.raises(NonPositiveParameter):
        Environment()
    with pytest.raises(ConfigValidation):
        get_preset("no-such-preset")


def test_field_entry_equivalent_to_detuning(preset, scales):
    bath, qubits, _ = preset
    by_field = derive_scales(bath, qubits, Environment(applied_field_B0=scales.field_B0))
    assert by_field.lambda_ == pytest.approx(scales.lambda_, rel=1e-9)
