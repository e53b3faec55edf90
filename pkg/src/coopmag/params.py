"""Physical inputs (CGS) and the dimensionless scales derived from them.

All frequencies are angular (rad/s). Energies quoted in erg are converted with
``HBAR``. Downstream modules only consume :class:`DimensionlessConfig`, whose
rates are expressed in units of the coupling scale ``nu``.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigValidation, GapExceedsQubitFrequency, NonPositiveParameter

HBAR = 1.054571817e-27  # erg s
K_B = 1.380649e-16  # erg / K
TWO_PI = 2.0 * math.pi

#: minimum pair separation, in units of lambda
RHO_MIN = 1e-3


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise NonPositiveParameter(f"{name} must be finite and > 0, got {value!r}")


def _non_negative(name: str, value: float) -> None:
    if not (value >= 0 and math.isfinite(value)):
        raise NonPositiveParameter(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class LongitudinalTransport:
    spin_conductivity_sigma: float
    spin_relaxation_tau_s: float
    static_susceptibility_chi0: float

    def __post_init__(self):
        _positive("spin_conductivity_sigma", self.spin_conductivity_sigma)
        _positive("spin_relaxation_tau_s", self.spin_relaxation_tau_s)
        _positive("static_susceptibility_chi0", self.static_susceptibility_chi0)

    @property
    def diffusion_length(self) -> float:
        return math.sqrt(
            self.spin_conductivity_sigma
            * self.spin_relaxation_tau_s
            / self.static_susceptibility_chi0
        )


@dataclass(frozen=True)
class BathSpec:
    """Ferromagnetic film.

    Parameters
    ----------
    spin_stiffness_D : float
        (erg cm^2) exchange stiffness of the magnon dispersion.
    surface_spin_density_s : float
        Saturation surface spin density (CGS, only enters ``nu``).
    gilbert_alpha : float
        Dimensionless Gilbert damping.
    zero_field_gap_K : float
        (erg) anisotropy contribution to the spin-wave gap.
    gyromagnetic_gamma : float
        (rad s^-1 G^-1) gyromagnetic ratio of the film.
    film_thickness_L : float
        (cm) informational only.
    """

    spin_stiffness_D: float
    surface_spin_density_s: float
    gilbert_alpha: float
    zero_field_gap_K: float
    gyromagnetic_gamma: float
    film_thickness_L: float = 0.0
    longitudinal: Optional[LongitudinalTransport] = None

    def __post_init__(self):
        _positive("spin_stiffness_D", self.spin_stiffness_D)
        _positive("surface_spin_density_s", self.surface_spin_density_s)
        _positive("gilbert_alpha", self.gilbert_alpha)
        _non_negative("zero_field_gap_K", self.zero_field_gap_K)
        _positive("gyromagnetic_gamma", self.gyromagnetic_gamma)
        _non_negative("film_thickness_L", self.film_thickness_L)
        if self.gilbert_alpha > 0.05:
            warnings.warn(
                f"gilbert_alpha={self.gilbert_alpha} is outside the weak-damping regime",
                stacklevel=3,
            )


@dataclass(frozen=True)
class QubitArraySpec:
    """Collinear 1d array of identical two-level spin qubits.

    Lengths in cm, the zero-field splitting in erg. ``positions`` (cm), when
    given, replaces the uniform lattice ``r_n = n a``.
    """

    n_qubits: int
    lattice_constant_a: float
    standoff_d: float
    zero_field_splitting_Delta0: float
    qubit_gamma_tilde: float
    positions: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise NonPositiveParameter(f"n_qubits must be an integer >= 1, got {self.n_qubits!r}")
        _positive("lattice_constant_a", self.lattice_constant_a)
        _positive("standoff_d", self.standoff_d)
        _positive("zero_field_splitting_Delta0", self.zero_field_splitting_Delta0)
        _positive("qubit_gamma_tilde", self.qubit_gamma_tilde)
        if self.positions is not None:
            pos = tuple(float(p) for p in self.positions)
            if len(pos) != self.n_qubits:
                raise NonPositiveParameter(
                    f"got {len(pos)} positions for n_qubits={self.n_qubits}"
                )
            if not all(math.isfinite(p) for p in pos):
                raise NonPositiveParameter("positions must be finite")
            if any(b <= a for a, b in zip(pos, pos[1:])):
                raise NonPositiveParameter("positions must be strictly increasing")
            object.__setattr__(self, "positions", pos)

    def resolved_positions(self) -> np.ndarray:
        if self.positions is not None:
            return np.asarray(self.positions, dtype=float)
        return self.lattice_constant_a * np.arange(self.n_qubits, dtype=float)


@dataclass(frozen=True)
class Environment:
    """Applied field and temperature.

    Exactly one of ``applied_field_B0`` (G) and ``detuning`` (rad/s, the gap
    between qubit frequency and spin-wave gap) must be given; the detuning is
    the knob every kernel depends on, and the field is solved from it.
    """

    applied_field_B0: Optional[float] = None
    temperature_T: float = 0.0
    detuning: Optional[float] = None

    def __post_init__(self):
        if (self.applied_field_B0 is None) == (self.detuning is None):
            raise NonPositiveParameter("give exactly one of applied_field_B0 and detuning")
        if self.applied_field_B0 is not None:
            _non_negative("applied_field_B0", self.applied_field_B0)
        _non_negative("temperature_T", self.temperature_T)

    def field(self, bath: BathSpec, qubits: QubitArraySpec) -> float:
        """Applied field in gauss, solving for it when a detuning is given."""
        if self.applied_field_B0 is not None:
            return float(self.applied_field_B0)
        num = (
            qubits.zero_field_splitting_Delta0 / HBAR
            - bath.zero_field_gap_K / HBAR
            - self.detuning
        )
        b0 = num / (qubits.qubit_gamma_tilde + bath.gyromagnetic_gamma)
        if b0 < 0:
            raise NonPositiveParameter(
                f"detuning {self.detuning:.4g} rad/s needs a negative field ({b0:.4g} G)"
            )
        return b0


def bose_occupation(hbar_omega_over_kT: float) -> float:
    """Bose-Einstein occupation for a given ``beta hbar omega``; 0 at T = 0."""
    if math.isinf(hbar_omega_over_kT):
        return 0.0
    return 1.0 / math.expm1(hbar_omega_over_kT)


@dataclass(frozen=True)
class DerivedScales:
    omega_qi: float
    gap_DeltaF: float
    field_B0: float
    temperature_T: float
    detuning_ratio: float
    sum_ratio: float
    gap_ratio: float
    lambda_: float
    lambda_prime: float
    lambda_exc: float
    nu: float
    d_over_lambda: float
    d_over_lambda_prime: float
    d_over_lambda_exc: float
    n_bose: float
    beta_hbar_omega: float
    gamma0: float  # units of nu
    gamma0_abs: float  # 1/s (inherits the unit ambiguity of nu)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _beta_hbar_omega(omega: float, temperature: float) -> float:
    if temperature == 0:
        return math.inf
    return HBAR * omega / (K_B * temperature)


def gamma0_over_nu(detuning_ratio: float, d_over_lambda: float, n_bose: float) -> float:
    """Single-qubit emission rate in units of ``nu``."""
    return 0.25 * math.pi * (n_bose + 1.0) * detuning_ratio * math.exp(-2.0 * d_over_lambda)


def derive_scales(bath: BathSpec, qubits: QubitArraySpec, env: Environment) -> DerivedScales:
    b0 = env.field(bath, qubits)
    delta0 = qubits.zero_field_splitting_Delta0 / HBAR
    omega_qi = delta0 - qubits.qubit_gamma_tilde * b0
    gap = bath.zero_field_gap_K / HBAR + bath.gyromagnetic_gamma * b0
    if omega_qi <= 0:
        raise NonPositiveParameter(f"qubit frequency is not positive at B0={b0:.4g} G")
    if omega_qi <= gap:
        raise GapExceedsQubitFrequency(
            f"omega_qi={omega_qi:.6g} rad/s does not exceed the gap {gap:.6g} rad/s"
        )
    d_over_hbar = bath.spin_stiffness_D / HBAR  # cm^2/s
    lam = math.sqrt(d_over_hbar / (omega_qi - gap))
    lam_p = math.sqrt(d_over_hbar / (omega_qi + gap))
    lam_exc = math.sqrt(d_over_hbar / gap) if gap > 0 else math.inf
    nu = (
        math.pi
        * HBAR**2
        * (bath.gyromagnetic_gamma * qubits.qubit_gamma_tilde) ** 2
        * bath.surface_spin_density_s
        * qubits.zero_field_splitting_Delta0
        / bath.spin_stiffness_D**2
    )
    bho = _beta_hbar_omega(omega_qi, env.temperature_T)
    n_b = bose_occupation(bho)
    d = qubits.standoff_d
    det_ratio = (omega_qi - gap) / delta0
    g0 = gamma0_over_nu(det_ratio, d / lam, n_b)
    return DerivedScales(
        omega_qi=omega_qi,
        gap_DeltaF=gap,
        field_B0=b0,
        temperature_T=env.temperature_T,
        detuning_ratio=det_ratio,
        sum_ratio=(omega_qi + gap) / delta0,
        gap_ratio=gap / delta0,
        lambda_=lam,
        lambda_prime=lam_p,
        lambda_exc=lam_exc,
        nu=nu,
        d_over_lambda=d / lam,
        d_over_lambda_prime=d / lam_p,
        d_over_lambda_exc=d / lam_exc,
        n_bose=n_b,
        beta_hbar_omega=bho,
        gamma0=g0,
        gamma0_abs=g0 * nu,
    )


@dataclass(frozen=True)
class DimensionlessConfig:
    """Everything the coupling kernels need, with lengths in units of lambda."""

    a_over_lambda: float
    d_over_lambda: float
    lambda_over_lambda_prime: float
    lambda_over_lambda_exc: float
    detuning_ratio: float
    sum_ratio: float
    gap_ratio: float
    temperature_T: float = 0.0
    hbar_omega_over_kB: float = 0.0  # K
    positions_over_lambda: tuple[float, ...] = field(default=())

    @property
    def n_qubits(self) -> int:
        return len(self.positions_over_lambda)

    @property
    def d_over_lambda_prime(self) -> float:
        return self.d_over_lambda * self.lambda_over_lambda_prime

    @property
    def d_over_lambda_exc(self) -> float:
        return self.d_over_lambda * self.lambda_over_lambda_exc

    @property
    def beta_hbar_omega(self) -> float:
        if self.temperature_T == 0:
            return math.inf
        return self.hbar_omega_over_kB / self.temperature_T

    @property
    def n_bose(self) -> float:
        return bose_occupation(self.beta_hbar_omega)

    @property
    def boltzmann_factor(self) -> float:
        """``exp(-beta hbar omega_qi)``, the absorption/emission ratio."""
        return math.exp(-self.beta_hbar_omega)

    @property
    def gamma0(self) -> float:
        return gamma0_over_nu(self.detuning_ratio, self.d_over_lambda, self.n_bose)

    def positions(self) -> np.ndarray:
        return np.asarray(self.positions_over_lambda, dtype=float)

    def with_lattice(self, a_over_lambda: float, n_qubits: Optional[int] = None) -> "DimensionlessConfig":
        """Uniform chain with the given spacing (and optionally size)."""
        _positive("a_over_lambda", a_over_lambda)
        n = self.n_qubits if n_qubits is None else int(n_qubits)
        pos = tuple(float(a_over_lambda * i) for i in range(n))
        return dataclasses.replace(self, a_over_lambda=float(a_over_lambda), positions_over_lambda=pos)

    def with_positions(self, positions: Sequence[float]) -> "DimensionlessConfig":
        return dataclasses.replace(self, positions_over_lambda=tuple(float(p) for p in positions))

    def at_temperature(self, temperature_T: float) -> "DimensionlessConfig":
        _non_negative("temperature_T", temperature_T)
        return dataclasses.replace(self, temperature_T=float(temperature_T))

    def with_standoff(self, d_over_lambda: float) -> "DimensionlessConfig":
        _positive("d_over_lambda", d_over_lambda)
        return dataclasses.replace(self, d_over_lambda=float(d_over_lambda))


def dimensionless_config(scales: DerivedScales, qubits: QubitArraySpec) -> DimensionlessConfig:
    lam = scales.lambda_
    pos = qubits.resolved_positions() / lam
    return DimensionlessConfig(
        a_over_lambda=qubits.lattice_constant_a / lam,
        d_over_lambda=scales.d_over_lambda,
        lambda_over_lambda_prime=lam / scales.lambda_prime,
        lambda_over_lambda_exc=lam / scales.lambda_exc,
        detuning_ratio=scales.detuning_ratio,
        sum_ratio=scales.sum_ratio,
        gap_ratio=scales.gap_ratio,
        temperature_T=scales.temperature_T,
        hbar_omega_over_kB=HBAR * scales.omega_qi / K_B,
        positions_over_lambda=tuple(float(p) for p in pos),
    )


# -- presets ----------------------------------------------------------------

_GAMMA_E = TWO_PI * 2.8e6  # rad s^-1 G^-1 (28 GHz/T)


def yig_nv() -> tuple[BathSpec, QubitArraySpec, Environment]:
    """YIG film (L = 10 nm) under an NV-center chain at d = 30 nm.

    The field is solved from a 10 MHz qubit/gap detuning.
    """
    bath = BathSpec(
        spin_stiffness_D=4.3e-30,
        surface_spin_density_s=8e-12,
        gilbert_alpha=1e-4,
        zero_field_gap_K=3.296e-18,
        gyromagnetic_gamma=_GAMMA_E,
        film_thickness_L=10e-7,
    )
    qubits = QubitArraySpec(
        n_qubits=9,
        lattice_constant_a=40e-7,
        standoff_d=30e-7,
        zero_field_splitting_Delta0=TWO_PI * HBAR * 2.87e9,
        qubit_gamma_tilde=_GAMMA_E,
    )
    env = Environment(detuning=TWO_PI * 10e6, temperature_T=0.0)
    return bath, qubits, env


PRESETS: dict[str, Callable[[], tuple[BathSpec, QubitArraySpec, Environment]]] = {
    "yig-nv": yig_nv,
}


def get_preset(name: str) -> tuple[BathSpec, QubitArraySpec, Environment]:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigValidation(
            {"preset": f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"}
        ) from None
