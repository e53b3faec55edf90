"""Density-matrix evolution under the collective master equation.

The generator is split into a non-Hermitian part
``-i (H_eff rho - rho H_eff^dag)`` with
``H_eff = sum J_ab s_a^+ s_b^- - i sum Gamma_ab s_a^+ s_b^- - i sum GammaTilde_ab s_a^- s_b^+``
applied as one sparse product, and the recycling terms
``2 Gamma_ab s_b^- rho s_a^+`` (and ``2 GammaTilde_ab s_b^+ rho s_a^-``), applied
by slicing ``rho`` viewed as a ``(2,) * 2N`` tensor.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.integrate import RK45

from ..couplings import CouplingMatrices
from ..errors import DimensionMismatch, DimensionTooLarge, StepSizeUnderflow
from .basis import excitation_number, lowering, n_qubits_of, pair_operator, sectors
from .channels import JumpChannels
from .observables import (
    DynamicsResult,
    correlations_from_populations,
    emission_operator,
    sigma_z_from_populations,
)

N_DENSE_MAX = 10


class Generator:
    """Lindblad generator for couplings ``J`` and rate matrices ``Gamma``, ``GammaTilde``.

    The ``Jz`` channel is never installed.
    """

    def __init__(self, J: np.ndarray, gamma: np.ndarray, gamma_tilde: Optional[np.ndarray] = None):
        J = np.asarray(J, dtype=float)
        n = J.shape[0]
        gamma = np.asarray(gamma, dtype=float)
        gamma_tilde = np.zeros((n, n)) if gamma_tilde is None else np.asarray(gamma_tilde, float)
        if gamma.shape != (n, n) or gamma_tilde.shape != (n, n):
            raise DimensionMismatch("J, Gamma and GammaTilde must share one N x N shape")
        self.n = n
        self.dim = 2**n
        self.J = J - np.diag(np.diag(J))
        self.gamma = gamma
        self.gamma_tilde = gamma_tilde
        h = pair_operator(self.J.astype(complex), "raise_lower")
        h = h - 1j * pair_operator(gamma.astype(complex), "raise_lower")
        if np.any(gamma_tilde):
            h = h - 1j * pair_operator(gamma_tilde.astype(complex), "lower_raise")
        self.h_eff = h.tocsr()
        self._emit = self._pairs(gamma)
        self._absorb = self._pairs(gamma_tilde)

    @classmethod
    def from_couplings(cls, C: CouplingMatrices) -> "Generator":
        return cls(C.J, C.Gamma, C.GammaTilde)

    @classmethod
    def from_channels(cls, J: np.ndarray, channels: JumpChannels) -> "Generator":
        return cls(J, channels.gamma(), channels.gamma_tilde())

    @staticmethod
    def _pairs(m: np.ndarray) -> list[tuple[int, int, float]]:
        n = m.shape[0]
        return [(a, b, 2.0 * m[a, b]) for a in range(n) for b in range(n) if m[a, b] != 0.0]

    def _view(self, m: np.ndarray, ket: int, bra: int) -> np.ndarray:
        """``m`` as ``(ket_hi, ket_bit, ket_lo, bra_hi, bra_bit, bra_lo)``."""
        n = self.n
        return m.reshape(2**ket, 2, 2 ** (n - 1 - ket), 2**bra, 2, 2 ** (n - 1 - bra))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """``d rho / dt`` for a Hermitian ``rho`` of shape ``(2^N, 2^N)``."""
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"state shape {rho.shape} does not match N={self.n}")
        x = self.h_eff @ rho
        out = -1j * (x - x.conj().T)
        # 2 G_ab s_b^- rho s_a^+ : ket bit b 1 -> 0, bra bit a 1 -> 0
        for a, b, w in self._emit:
            vi, vo = self._view(rho, b, a), self._view(out, b, a)
            vo[:, 0, :, :, 0, :] += w * vi[:, 1, :, :, 1, :]
        for a, b, w in self._absorb:
            vi, vo = self._view(rho, b, a), self._view(out, b, a)
            vo[:, 1, :, :, 1, :] += w * vi[:, 0, :, :, 0, :]
        return out


class BlockSuperoperator:
    """Generator restricted to the coherence blocks of a given excitation difference.

    ``rho_ij`` with ``n(i) - n(j) = delta`` only ever feeds entries with the
    same ``delta``: the flip-flop Hamiltonian, the non-Hermitian decay and the
    jumps all shift ket and bra excitation numbers together. Populations live
    in ``delta = 0``, so a state that is block diagonal in excitation number
    is evolved on a vector of length ``C(2N, N)`` instead of ``4^N``.
    """

    def __init__(self, gen: Generator, deltas=(0,)):
        n = gen.n
        secs = sectors(n)
        h = gen.h_eff
        self.n = n
        self.dim = gen.dim
        self.deltas = tuple(sorted(set(int(d) for d in deltas) | {-int(d) for d in deltas}))
        blocks = [(p, p - d) for d in self.deltas for p in range(n + 1) if 0 <= p - d <= n]
        self.blocks = blocks
        self.offset = {}
        off = 0
        rows, cols = [], []
        for p, q in blocks:
            self.offset[(p, q)] = off
            i, j = np.meshgrid(secs[p], secs[q], indexing="ij")
            rows.append(i.ravel())
            cols.append(j.ravel())
            off += secs[p].size * secs[q].size
        self.size = off
        self.rows = np.concatenate(rows)
        self.cols = np.concatenate(cols)
        # position of (j, i) for each (i, j), used to re-symmetrize
        key = self.rows * self.dim + self.cols
        order = np.argsort(key)
        swapped = self.cols * self.dim + self.rows
        self.conj_perm = order[np.searchsorted(key[order], swapped)]
        self.diag_pos = np.flatnonzero(self.rows == self.cols)
        self.diag_state = self.rows[self.diag_pos]

        hb = {p: h[secs[p]][:, secs[p]] for p in range(n + 1)}
        low = [lowering(n, b) for b in range(n)]
        parts = []

        def place(m, p, q, p_src, q_src):
            m = sparse.coo_matrix(m)
            return (m.row + self.offset[(p, q)], m.col + self.offset[(p_src, q_src)], m.data)

        for p, q in blocks:
            ip, iq = sparse.identity(secs[p].size, format="csr"), sparse.identity(secs[q].size, format="csr")
            coh = -1j * sparse.kron(hb[p], iq) + 1j * sparse.kron(ip, hb[q].conj())
            parts.append(place(coh, p, q, p, q))
            if (p + 1, q + 1) in self.offset:
                acc = None
                for a, b, w in gen._emit:
                    sb = low[b][secs[p]][:, secs[p + 1]]
                    sa = low[a][secs[q]][:, secs[q + 1]]
                    term = w * sparse.kron(sb, sa)
                    acc = term if acc is None else acc + term
                if acc is not None:
                    parts.append(place(acc, p, q, p + 1, q + 1))
            if (p - 1, q - 1) in self.offset:
                acc = None
                for a, b, w in gen._absorb:
                    sb = low[b].T.tocsr()[secs[p]][:, secs[p - 1]]
                    sa = low[a].T.tocsr()[secs[q]][:, secs[q - 1]]
                    term = w * sparse.kron(sb, sa)
                    acc = term if acc is None else acc + term
                if acc is not None:
                    parts.append(place(acc, p, q, p - 1, q - 1))
        r = np.concatenate([x[0] for x in parts])
        c = np.concatenate([x[1] for x in parts])
        v = np.concatenate([x[2] for x in parts]).astype(complex)
        self.matrix = sparse.csr_matrix((v, (r, c)), shape=(self.size, self.size))
        self.matrix.sum_duplicates()

    @staticmethod
    def deltas_of(rho: np.ndarray, n: int, tol: float = 0.0) -> tuple[int, ...]:
        ne = excitation_number(n)
        i, j = np.nonzero(np.abs(rho) > tol)
        return tuple(sorted(set((ne[i] - ne[j]).tolist()) | {0}))

    def pack(self, rho: np.ndarray) -> np.ndarray:
        return np.asarray(rho)[self.rows, self.cols].astype(complex)

    def unpack(self, y: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[self.rows, self.cols] = y
        return out

    def hermitize(self, y: np.ndarray) -> None:
        y[...] = 0.5 * (y + y[self.conj_perm].conj())

    def populations(self, y: np.ndarray) -> np.ndarray:
        p = np.zeros(self.dim)
        p[self.diag_state] = y[self.diag_pos].real
        return p

    def expectation_vector(self, op: sparse.spmatrix) -> np.ndarray:
        """``w`` with ``Tr(op rho) = w . y``."""
        op = sparse.csr_matrix(op)
        return np.asarray(op[self.cols, self.rows]).ravel()

    def min_eigenvalue(self, y: np.ndarray) -> float:
        if self.deltas == (0,):
            secs = sectors(self.n)
            vals = []
            for p in range(self.n + 1):
                off = self.offset[(p, p)]
                d = secs[p].size
                block = y[off:off + d * d].reshape(d, d)
                vals.append(np.linalg.eigvalsh(0.5 * (block + block.conj().T))[0])
            return float(min(vals))
        return float(np.linalg.eigvalsh(self.unpack(y))[0])


def liouvillian_apply(state: np.ndarray, J: np.ndarray, channels: JumpChannels) -> np.ndarray:
    """One generator action on a density matrix, from the flip-flop couplings and channels."""
    n = n_qubits_of(np.asarray(state).shape[0])
    if n != channels.n_qubits or np.shape(J) != (n, n):
        raise DimensionMismatch("state, couplings and channels disagree on N")
    return Generator.from_channels(J, channels).apply(np.asarray(state, dtype=complex))


def evolve_density_matrix(
    rho0: np.ndarray,
    generator: Generator,
    t_grid: Sequence[float],
    rtol: float = 1e-8,
    atol: float = 1e-10,
    snapshot_times: Sequence[float] = (),
    n_dense_max: int = N_DENSE_MAX,
) -> DynamicsResult:
    """Integrate the master equation with an adaptive embedded Runge-Kutta (5,4) pair.

    Only the coherence blocks present in ``rho0`` are evolved (see
    :class:`BlockSuperoperator`). Observables are sampled on ``t_grid`` from
    the step interpolant; the state is re-symmetrized after every accepted
    step. Correlation maps are stored at the grid points closest to
    ``snapshot_times``.
    """
    n = generator.n
    if n > n_dense_max:
        raise DimensionTooLarge(f"dense evolution is limited to N <= {n_dense_max}, got {n}")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 1:
        rho0 = np.outer(rho0, rho0.conj())
    if rho0.shape != (generator.dim, generator.dim):
        raise DimensionMismatch(f"initial state shape {rho0.shape} does not match N={n}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    snap_idx = sorted({int(np.argmin(np.abs(t_grid - s))) for s in snapshot_times})

    start = time.perf_counter()
    sup = BlockSuperoperator(generator, BlockSuperoperator.deltas_of(rho0, n))
    w_rate = sup.expectation_vector(emission_operator(generator.gamma, generator.gamma_tilde))
    nt = t_grid.size
    sz = np.empty((n, nt))
    rate = np.empty(nt)
    trace_dev = 0.0
    min_eig = np.inf
    snaps = []

    def record(k: int, y: np.ndarray) -> None:
        nonlocal trace_dev, min_eig
        y = y.copy()
        sup.hermitize(y)
        p = sup.populations(y)
        sz[:, k] = sigma_z_from_populations(p)
        rate[k] = float(np.real(w_rate @ y))
        trace_dev = max(trace_dev, abs(p.sum() - 1.0))
        min_eig = min(min_eig, sup.min_eigenvalue(y))
        if k in snap_idx:
            snaps.append((float(t_grid[k]), correlations_from_populations(p)))

    mat = sup.matrix
    fun = lambda t, y: mat @ y
    y0 = sup.pack(0.5 * (rho0 + rho0.conj().T))
    record(0, y0)
    k = 1
    n_steps = 0
    if nt > 1:
        solver = RK45(fun, t_grid[0], y0, t_grid[-1], rtol=rtol, atol=atol)
        while k < nt:
            msg = solver.step()
            if solver.status == "failed":
                raise StepSizeUnderflow(f"integrator failed at t={solver.t:.6g}: {msg}")
            n_steps += 1
            sup.hermitize(solver.y)
            interp = None
            while k < nt and t_grid[k] <= solver.t:
                if t_grid[k] == solver.t:
                    record(k, solver.y)
                else:
                    interp = interp or solver.dense_output()
                    record(k, interp(t_grid[k]))
                k += 1
            if solver.status == "finished" and k < nt:
                raise StepSizeUnderflow("integrator stopped before the end of the grid")
    snaps.sort(key=lambda s: s[0])
    return DynamicsResult(
        t_grid=t_grid,
        sigma_z_per_qubit=sz,
        emission_rate=rate,
        correlation_snapshots=snaps,
        method="dense",
        diagnostics={
            "trace_deviation": trace_dev,
            "min_eigenvalue": min_eig,
            "n_steps": n_steps,
            "state_size": sup.size,
            "wall_seconds": time.perf_counter() - start,
        },
    )


def thermal_product_state(n: int, boltzmann_factor: float) -> np.ndarray:
    """``rho = (x) diag(p_g, p_e)`` with ``p_e / p_g = exp(-beta hbar omega)``."""
    pe = boltzmann_factor / (1.0 + boltzmann_factor)
    single = np.array([1.0 - pe, pe])  # index 0 ground, 1 excited
    p = np.ones(1)
    for _ in range(n):
        p = np.kron(p, single)
    return np.diag(p).astype(complex)

