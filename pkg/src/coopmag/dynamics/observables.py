"""Observables shared by the dense and trajectory solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse

from .basis import bit_table, n_qubits_of, pair_operator


def default_time_grid(t_max: float = 5.0, n_points: int = 200, n_log: int = 49,
                      t_log_min: float = 1e-2, t_switch: float = 0.5) -> np.ndarray:
    """``t = 0``, then log-spaced points up to ``t_switch``, then linear to ``t_max``.

    Dense early sampling resolves the burst; the linear part covers the tail.
    """
    if n_points < n_log + 3 or not 0 < t_log_min < t_switch < t_max:
        raise ValueError("inconsistent time-grid parameters")
    log_part = np.geomspace(t_log_min, t_switch, n_log + 1)[:-1]
    lin_part = np.linspace(t_switch, t_max, n_points - n_log - 1)
    return np.concatenate(([0.0], log_part, lin_part))


def emission_operator(gamma: np.ndarray, gamma_tilde: np.ndarray) -> sparse.csr_matrix:
    """``O`` with ``<O> = -(1/2) d/dt sum_a <sigma_z^a>``.

    Emission contributes ``2 sum Gamma_ab s_a^+ s_b^-`` and absorption
    ``-2 sum GammaTilde_ab s_a^- s_b^+``; the flip-flop Hamiltonian conserves
    the excitation number and drops out.
    """
    op = 2.0 * pair_operator(np.asarray(gamma, float), "raise_lower")
    if np.any(gamma_tilde):
        op = op - 2.0 * pair_operator(np.asarray(gamma_tilde, float), "lower_raise")
    return op.tocsr()


def sigma_z_from_populations(p: np.ndarray) -> np.ndarray:
    """Per-qubit ``<sigma_z>`` from basis populations; ``p`` may be ``(dim,)`` or ``(dim, T)``."""
    n = n_qubits_of(p.shape[0])
    z = 2.0 * bit_table(n).astype(float) - 1.0
    return z.T @ p


def correlations_from_populations(p: np.ndarray) -> np.ndarray:
    """``c_ab = <s_a^+ s_b^+ s_b^- s_a^->``: joint excitation probability, zero diagonal."""
    n = n_qubits_of(p.shape[0])
    b = bit_table(n).astype(float)
    c = (b * p[:, None]).T @ b
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 0.0)
    return c


def correlation_map(state: np.ndarray) -> np.ndarray:
    """Correlation map of a density matrix (2d) or a pure state (1d)."""
    state = np.asarray(state)
    if state.ndim == 1:
        p = np.abs(state) ** 2
        p = p / p.sum()
    else:
        p = np.real(np.diagonal(state)).copy()
    return correlations_from_populations(p)


@dataclass
class DynamicsResult:
    """Time traces in units of ``Gamma0`` (time ``1/Gamma0``, rates ``Gamma0``).

    ``*_se`` fields are standard errors of the trajectory mean and are
    ``None`` for the deterministic solver.
    """

    t_grid: np.ndarray
    sigma_z_per_qubit: np.ndarray  # (N, T)
    emission_rate: np.ndarray  # (T,)
    correlation_snapshots: list = field(default_factory=list)  # [(t, c)]
    method: str = "dense"
    trajectory_count: Optional[int] = None
    sigma_z_se: Optional[np.ndarray] = None
    total_sigma_z_se: Optional[np.ndarray] = None
    emission_rate_se: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return self.sigma_z_per_qubit.shape[0]

    @property
    def total_sigma_z(self) -> np.ndarray:
        return self.sigma_z_per_qubit.sum(axis=0)

    @property
    def stochastic(self) -> bool:
        return self.trajectory_count is not None


def emission_rate(obj, gamma: Optional[np.ndarray] = None,
                  gamma_tilde: Optional[np.ndarray] = None):
    """``R = -(1/2) d/dt sum_a <sigma_z^a>``.

    For a :class:`DynamicsResult` the stored trace (computed from the
    generator during the run) is returned. For a state, the rate matrices are
    required and ``<O>`` of :func:`emission_operator` is evaluated.
    """
    if isinstance(obj, DynamicsResult):
        return obj.emission_rate
    if gamma is None:
        raise ValueError("rate matrices are required to evaluate R on a state")
    gt = np.zeros_like(gamma) if gamma_tilde is None else gamma_tilde
    op = emission_operator(gamma, gt)
    state = np.asarray(obj)
    if state.ndim == 1:
        return float(np.real(np.vdot(state, op @ state)) / np.real(np.vdot(state, state)))
    return float(np.real(np.sum(op.multiply(state.T))))
