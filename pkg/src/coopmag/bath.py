"""Spin-wave dispersion and susceptibilities of the ferromagnetic film.

These evaluators are diagnostics: they document the regime the coupling
kernels assume (qubit frequency above the gap, weak damping). The longitudinal
susceptibility is deliberately not reachable from the master equation.

Frequencies are angular. The stiffness enters as ``D / hbar`` (cm^2 rad/s) so
that ``omega_F(k) = (D/hbar) k^2 + Delta_F``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigValidation, MissingTransportParameters
from .params import HBAR, BathSpec, Environment, QubitArraySpec


@dataclass(frozen=True)
class SusceptibilityPoint:
    omega: float
    k: float
    value: complex


def _field(bath: BathSpec, env: Environment, qubits: Optional[QubitArraySpec]) -> float:
    if env.applied_field_B0 is not None:
        return float(env.applied_field_B0)
    if qubits is None:
        raise ConfigValidation(
            {"qubits": "needed to solve the field when the environment gives a detuning"}
        )
    return env.field(bath, qubits)


def spin_wave_gap(bath: BathSpec, env: Environment, qubits: Optional[QubitArraySpec] = None) -> float:
    """``Delta_F = K/hbar + gamma B0`` in rad/s."""
    return bath.zero_field_gap_K / HBAR + bath.gyromagnetic_gamma * _field(bath, env, qubits)


def dispersion_omega_f(k, bath: BathSpec, env: Environment, qubits: Optional[QubitArraySpec] = None):
    """Magnon frequency ``omega_F(k)`` (rad/s) for wavenumber ``k`` (1/cm)."""
    k = np.asarray(k, dtype=float)
    out = (bath.spin_stiffness_D / HBAR) * k * k + spin_wave_gap(bath, env, qubits)
    return out[()] if out.ndim == 0 else out


def chi_minus_plus(omega, k, bath: BathSpec, env: Environment, qubits: Optional[QubitArraySpec] = None):
    """Transverse susceptibility ``s / (D (k^2 - 1/lambda^2) - i alpha omega)``.

    With ``1/lambda^2 = (omega - Delta_F) hbar / D`` the real part of the
    denominator is ``omega_F(k) - omega``; the same closed form is used below
    the gap, where ``lambda^2 < 0``.
    """
    omega = np.asarray(omega, dtype=float)
    den = dispersion_omega_f(k, bath, env, qubits) - omega - 1j * bath.gilbert_alpha * omega
    out = bath.surface_spin_density_s / den
    return out[()] if np.ndim(out) == 0 else out


def chi_plus_minus(omega, k, bath: BathSpec, env: Environment, qubits: Optional[QubitArraySpec] = None):
    """Counter-rotating susceptibility ``s / (D (k^2 + 1/lambda'^2) - i alpha omega)``."""
    omega = np.asarray(omega, dtype=float)
    den = dispersion_omega_f(k, bath, env, qubits) + omega - 1j * bath.gilbert_alpha * omega
    out = bath.surface_spin_density_s / den
    return out[()] if np.ndim(out) == 0 else out


def chi_zz(omega, k, bath: BathSpec):
    """Diffusive longitudinal susceptibility.

    ``chi0 (l_s^-2 + k^2) / (-i omega chi0/sigma + l_s^-2 + k^2)``.

    Raises
    ------
    MissingTransportParameters
        If the bath carries no :class:`LongitudinalTransport` block.
    """
    tr = bath.longitudinal
    if tr is None:
        raise MissingTransportParameters("chi_zz needs the longitudinal transport parameters")
    omega = np.asarray(omega, dtype=float)
    k = np.asarray(k, dtype=float)
    q2 = tr.diffusion_length**-2 + k * k
    chi0 = tr.static_susceptibility_chi0
    # divided through by q2 so that omega = 0 returns chi0 exactly
    out = chi0 / (1.0 - 1j * omega * chi0 / (tr.spin_conductivity_sigma * q2))
    return out[()] if np.ndim(out) == 0 else out


def probe_grid(kind: str, omegas, ks, bath: BathSpec, env: Environment,
               qubits: Optional[QubitArraySpec] = None) -> list[SusceptibilityPoint]:
    """Evaluate one susceptibility on the outer product of ``omegas`` and ``ks``."""
    fns = {
        "minus_plus": lambda w, k: chi_minus_plus(w, k, bath, env, qubits),
        "plus_minus": lambda w, k: chi_plus_minus(w, k, bath, env, qubits),
        "zz": lambda w, k: chi_zz(w, k, bath),
    }
    if kind not in fns:
        raise ConfigValidation({"probe.kind": f"unknown susceptibility {kind!r}"})
    w, kk = np.meshgrid(np.asarray(omegas, float), np.asarray(ks, float), indexing="ij")
    vals = np.asarray(fns[kind](w, kk))
    return [
        SusceptibilityPoint(float(a), float(b), complex(c))
        for a, b, c in zip(w.ravel(), kk.ravel(), vals.ravel())
    ]
