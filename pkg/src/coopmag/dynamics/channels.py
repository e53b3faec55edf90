"""Diagonal form of the dissipators.

A PSD rate matrix ``G = sum_m g_m c_m c_m^T`` turns
``sum_ab G_ab (2 s_b rho s_a^dag - {s_a^dag s_b, rho})`` into independent
channels ``L_m = sum_b c_mb s_b`` with rates ``2 g_m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..couplings import CouplingMatrices

RATE_CUTOFF = 1e-14


@dataclass(frozen=True)
class Channel:
    rate: float  # 2 g_m
    coefficients: np.ndarray  # real, unit norm, length N


@dataclass(frozen=True)
class JumpChannels:
    """Emission channels (``sigma^-``) from ``Gamma``, absorption (``sigma^+``) from ``GammaTilde``."""

    n_qubits: int
    emission: list[Channel] = field(default_factory=list)
    absorption: list[Channel] = field(default_factory=list)

    @staticmethod
    def _matrix(chs: list[Channel], n: int) -> np.ndarray:
        m = np.zeros((n, n))
        for ch in chs:
            m += 0.5 * ch.rate * np.outer(ch.coefficients, ch.coefficients)
        return 0.5 * (m + m.T)

    def gamma(self) -> np.ndarray:
        """Rate matrix reassembled from the emission channels."""
        return self._matrix(self.emission, self.n_qubits)

    def gamma_tilde(self) -> np.ndarray:
        return self._matrix(self.absorption, self.n_qubits)


def diagonalize_rates(G: np.ndarray, scale: float) -> list[Channel]:
    """Channels of a symmetric PSD matrix; rates below ``RATE_CUTOFF * scale`` are dropped."""
    G = np.asarray(G, dtype=float)
    if not np.any(G):
        return []
    w, v = np.linalg.eigh(G)
    out = []
    for g, c in zip(w[::-1], v.T[::-1]):
        if g < RATE_CUTOFF * scale:
            continue
        # fix the sign so that the largest component is positive
        k = int(np.argmax(np.abs(c)))
        c = c if c[k] > 0 else -c
        out.append(Channel(rate=2.0 * float(g), coefficients=c.copy()))
    return out


def build_jump_channels(C: CouplingMatrices) -> JumpChannels:
    scale = float(C.gamma0)
    return JumpChannels(
        n_qubits=C.n_qubits,
        emission=diagonalize_rates(C.Gamma, scale),
        absorption=diagonalize_rates(C.GammaTilde, scale),
    )
