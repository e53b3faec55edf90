"""Magnon-mediated coupling kernels and the N x N coupling matrices.

Distances are in units of the magnon wavelength ``lambda``; every coupling is
returned in units of ``nu``. The flip-flop coupling ``J`` has a full form (a
principal-value integral plus a regular counter-rotating term) and the
asymptotic closure in terms of ``Y0`` used for dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import CoincidentQubits, ConfigValidation, DomainError
from .params import RHO_MIN, DimensionlessConfig
from .specfun import (
    DEFAULT_SETTINGS,
    QuadratureSettings,
    bessel_j0,
    bessel_y0,
    pv_kernel,
    regular_kernel,
)

J_MODES = ("asymptotic", "full")


def coupling_Gamma(rho, cfg: DimensionlessConfig):
    """Dissipative coupling ``(pi/4)(n_B+1) det J0(rho) exp(-2d/lambda)``."""
    pref = 0.25 * math.pi * (cfg.n_bose + 1.0) * cfg.detuning_ratio * math.exp(-2.0 * cfg.d_over_lambda)
    return pref * bessel_j0(rho)


def coupling_GammaTilde(rho, cfg: DimensionlessConfig):
    """Absorption matrix element, ``exp(-beta hbar omega)`` times :func:`coupling_Gamma`."""
    return cfg.boltzmann_factor * coupling_Gamma(rho, cfg)


def coupling_J(rho: float, cfg: DimensionlessConfig, mode: str = "asymptotic",
               settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Coherent flip-flop coupling.

    Parameters
    ----------
    rho : float
        Pair distance in units of lambda.
    mode : {"asymptotic", "full"}
        ``asymptotic`` is ``(pi/4) det Y0(rho)``; ``full`` evaluates the
        principal-value integral and the counter-rotating term.
    """
    rho = abs(float(rho))
    if mode == "asymptotic":
        if rho == 0:
            raise DomainError("asymptotic J is singular at rho = 0")
        return 0.25 * math.pi * cfg.detuning_ratio * float(bessel_y0(rho))
    if mode == "full":
        lp = cfg.lambda_over_lambda_prime
        pv = pv_kernel(rho, 2.0 * cfg.d_over_lambda, settings)
        reg = regular_kernel(rho * lp, 2.0 * cfg.d_over_lambda_prime, settings)
        return -0.5 * (cfg.detuning_ratio * pv + cfg.sum_ratio * reg)
    raise ConfigValidation({"coupling.j_mode": f"expected one of {J_MODES}, got {mode!r}"})


def coupling_Jz(rho: float, cfg: DimensionlessConfig,
                settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Ising coupling, ``-(Delta_F/Delta0)`` times the regular kernel on the gap scale."""
    le = cfg.lambda_over_lambda_exc
    return -cfg.gap_ratio * regular_kernel(abs(float(rho)) * le, 2.0 * cfg.d_over_lambda_exc, settings)


@dataclass(frozen=True)
class CouplingMatrices:
    """Coupling matrices of one geometry, in units of ``nu``.

    ``gamma0`` is the single-qubit rate (including the Bose factor) and
    ``psd_clip_applied`` the magnitude of the most negative eigenvalue of the
    raw ``Gamma`` that was clipped to zero (0 when none was).
    """

    J: np.ndarray
    Gamma: np.ndarray
    GammaTilde: np.ndarray
    gamma0: float
    boltzmann_factor: float
    psd_clip_applied: float = 0.0
    Jz: Optional[np.ndarray] = None
    j_mode: str = "asymptotic"
    unit: str = "nu"

    @property
    def n_qubits(self) -> int:
        return self.Gamma.shape[0]

    def in_units_of_gamma0(self) -> "CouplingMatrices":
        """Same matrices divided by ``gamma0`` (time unit ``1/Gamma0``)."""
        if self.unit == "gamma0":
            return self
        g0 = self.gamma0
        return replace(
            self,
            J=self.J / g0,
            Gamma=self.Gamma / g0,
            GammaTilde=self.GammaTilde / g0,
            Jz=None if self.Jz is None else self.Jz / g0,
            psd_clip_applied=self.psd_clip_applied / g0,
            gamma0=1.0,
            unit="gamma0",
        )


def pair_distances(positions: Sequence[float]) -> np.ndarray:
    r = np.asarray(positions, dtype=float)
    if r.ndim != 1 or not np.all(np.isfinite(r)):
        raise ConfigValidation({"positions": "expected a finite 1d sequence"})
    return np.abs(r[:, None] - r[None, :])


def _cached_pairs(rho_upper: np.ndarray, fn, rtol: float = 1e-13) -> np.ndarray:
    """Evaluate ``fn`` once per distinct distance.

    Distances agreeing to ``rtol`` (a uniform lattice produces ulp-level
    scatter) share the value computed at the smallest of them.
    """
    order = np.argsort(rho_upper, kind="stable")
    out = np.empty_like(rho_upper)
    rep, val = None, 0.0
    for idx in order:
        r = rho_upper[idx]
        if rep is None or r - rep > rtol * rep:
            rep, val = r, fn(r)
        out[idx] = val
    return out


def condition_psd(G: np.ndarray) -> tuple[np.ndarray, float]:
    """Clip negative eigenvalues of a symmetric matrix.

    Returns the conditioned matrix and the largest clipped magnitude. A matrix
    that is already PSD is returned unchanged.
    """
    w, v = np.linalg.eigh(G)
    if w[0] >= 0:
        return G, 0.0
    worst = float(-w[0])
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.T
    return 0.5 * (out + out.T), worst


def build_coupling_matrices(
    positions: Sequence[float],
    cfg: DimensionlessConfig,
    j_mode: str = "asymptotic",
    include_jz: bool = False,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> CouplingMatrices:
    """Assemble ``J``, ``Gamma``, ``GammaTilde`` (and optionally ``Jz``).

    ``positions`` are 1d coordinates in units of lambda. Temperature and
    standoff come from ``cfg``.

    Raises
    ------
    CoincidentQubits
        If two qubits are closer than ``RHO_MIN`` lambda.
    """
    rho = pair_distances(positions)
    n = rho.shape[0]
    iu = np.triu_indices(n, 1)
    rho_u = rho[iu]
    if rho_u.size and rho_u.min() < RHO_MIN:
        k = int(np.argmin(rho_u))
        raise CoincidentQubits(
            f"qubits {iu[0][k]} and {iu[1][k]} are {rho_u[k]:.3g} lambda apart (< {RHO_MIN})"
        )
    if j_mode not in J_MODES:
        raise ConfigValidation({"coupling.j_mode": f"expected one of {J_MODES}, got {j_mode!r}"})

    def sym(upper: np.ndarray, diag: float) -> np.ndarray:
        m = np.full((n, n), 0.0)
        m[iu] = upper
        m = m + m.T
        np.fill_diagonal(m, diag)
        return m

    g0 = float(coupling_Gamma(0.0, cfg))
    gamma_raw = sym(np.asarray(coupling_Gamma(rho_u, cfg), dtype=float), g0)
    gamma, clipped = condition_psd(gamma_raw)

    if j_mode == "asymptotic":
        j_u = 0.25 * math.pi * cfg.detuning_ratio * np.asarray(bessel_y0(rho_u), dtype=float)
    else:
        j_u = _cached_pairs(rho_u, lambda r: coupling_J(r, cfg, "full", settings))
    jz = None
    if include_jz:
        jz = sym(_cached_pairs(rho_u, lambda r: coupling_Jz(r, cfg, settings)), 0.0)

    bf = cfg.boltzmann_factor
    return CouplingMatrices(
        J=sym(np.asarray(j_u, dtype=float), 0.0),
        Gamma=gamma,
        GammaTilde=bf * gamma,
        gamma0=g0,
        boltzmann_factor=bf,
        psd_clip_applied=clipped,
        Jz=jz,
        j_mode=j_mode,
    )


def raw_min_eigenvalue(positions: Sequence[float], cfg: DimensionlessConfig) -> float:
    """Smallest eigenvalue of the unconditioned ``Gamma``, in units of ``Gamma0``."""
    rho = pair_distances(positions)
    g = np.asarray(coupling_Gamma(rho, cfg), dtype=float)
    g = 0.5 * (g + g.T)
    return float(np.linalg.eigvalsh(g)[0] / coupling_Gamma(0.0, cfg))
