"""Quantum-jump unraveling of the master equation.

Between jumps a trajectory evolves under ``H_eff``. It conserves the
excitation number, so each sector is diagonalised once and the no-jump
evolution is exact. A jump occurs when the squared norm falls below a uniform
random threshold; the crossing is bracketed on the output grid and refined to
a fixed time tolerance, then a channel is chosen with probability
proportional to ``rate_m |L_m psi|^2``.

Trajectory ``i`` draws from its own generator seeded by
``(master_seed, i)``; results are stacked in index order, so the output does
not depend on the number of worker threads.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, optimize, sparse

from ..errors import DimensionMismatch, DimensionTooLarge, EigensolverFailure
from .basis import lowering, sectors
from .channels import JumpChannels
from .dense import Generator
from .observables import DynamicsResult, correlations_from_populations, emission_operator, sigma_z_from_populations

N_TRAJ_MAX = 14
TIME_TOL = 1e-6
CHUNK = 64


@dataclass
class _Sector:
    idx: np.ndarray
    w: Optional[np.ndarray] = None  # eigenvalues
    v: Optional[np.ndarray] = None
    v_inv: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None  # kept when the eigenbasis is unreliable


class NoJumpPropagator:
    """Exact ``exp(-i H_eff t)`` on every excitation-number sector."""

    def __init__(self, h_eff: sparse.spmatrix, n: int, recon_tol: float = 1e-10):
        self.n = n
        self.dim = 2**n
        h_eff = sparse.csr_matrix(h_eff)
        self.sectors: list[_Sector] = []
        for idx in sectors(n):
            h = h_eff[idx][:, idx].toarray()
            sec = _Sector(idx=idx)
            scale = max(np.abs(h).max(), 1e-300)
            try:
                w, v = np.linalg.eig(h)
                v_inv = np.linalg.solve(v, np.eye(v.shape[0]))
                err = np.abs((v * w) @ v_inv - h).max() / scale
            except np.linalg.LinAlgError:
                err = np.inf
            if err <= recon_tol:
                sec.w, sec.v, sec.v_inv = w, v, v_inv
            else:
                sec.h = h
            self.sectors.append(sec)

    def coefficients(self, psi: np.ndarray) -> list:
        out = []
        for sec in self.sectors:
            part = psi[sec.idx]
            if not np.any(part):
                continue
            out.append((sec, sec.v_inv @ part if sec.h is None else part))
        return out

    @staticmethod
    def evaluate(coeffs: list, taus: np.ndarray, dim: int) -> np.ndarray:
        """States at the relative times ``taus``, shape ``(dim, len(taus))``."""
        taus = np.atleast_1d(taus)
        psi = np.zeros((dim, taus.size), dtype=complex)
        for sec, a in coeffs:
            if sec.h is None:
                psi[sec.idx] = sec.v @ (np.exp(-1j * np.outer(sec.w, taus)) * a[:, None])
            else:
                for j, t in enumerate(taus):
                    psi[sec.idx, j] = linalg.expm(-1j * t * sec.h) @ a
        return psi

    def propagate(self, psi: np.ndarray, taus) -> np.ndarray:
        return self.evaluate(self.coefficients(np.asarray(psi, complex)), np.asarray(taus, float), self.dim)


class _Jumps:
    def __init__(self, channels: JumpChannels):
        n = channels.n_qubits
        low = [lowering(n, b) for b in range(n)]
        ops, rates = [], []
        for ch in channels.emission:
            ops.append(sum(c * l for c, l in zip(ch.coefficients, low)).tocsr())
            rates.append(ch.rate)
        for ch in channels.absorption:
            ops.append(sum(c * l.T for c, l in zip(ch.coefficients, low)).tocsr())
            rates.append(ch.rate)
        self.ops = ops
        self.rates = np.array(rates)

    def apply(self, psi: np.ndarray, u: float) -> np.ndarray:
        cands = [op @ psi for op in self.ops]
        w = self.rates * np.array([np.vdot(c, c).real for c in cands])
        cum = np.cumsum(w)
        if cum.size == 0 or cum[-1] <= 0:
            raise EigensolverFailure("jump requested with no open channel")
        m = int(np.searchsorted(cum, u * cum[-1], side="right"))
        m = min(m, len(cands) - 1)
        out = cands[m]
        return out / np.linalg.norm(out)


def _one_trajectory(psi0, prop: NoJumpPropagator, jumps: _Jumps, t_grid, rng,
                    op_r, snap_idx, chunk_len: int = 16):
    dim, nt = prop.dim, t_grid.size
    n = prop.n
    sz = np.empty((n, nt))
    rate = np.empty(nt)
    snaps = np.empty((len(snap_idx), n, n))
    snap_pos = {k: i for i, k in enumerate(snap_idx)}

    def record(k, psi):
        p = np.abs(psi) ** 2
        norm2 = p.sum()
        p /= norm2
        sz[:, k] = sigma_z_from_populations(p)
        rate[k] = np.vdot(psi, op_r @ psi).real / norm2
        if k in snap_pos:
            snaps[snap_pos[k]] = correlations_from_populations(p)

    psi = psi0 / np.linalg.norm(psi0)
    t_cur = t_grid[0]
    record(0, psi)
    k = 1
    n_jumps = 0
    r = rng.random()
    coeffs = prop.coefficients(psi)
    while k < nt:
        ks = np.arange(k, min(k + chunk_len, nt))
        states = prop.evaluate(coeffs, t_grid[ks] - t_cur, dim)
        norms = np.einsum("ij,ij->j", states.conj(), states).real
        below = np.flatnonzero(norms < r)
        stop = below[0] if below.size else ks.size
        for j in range(stop):
            record(ks[j], states[:, j])
        k = ks[0] + stop
        if not below.size:
            continue
        lo = t_grid[k - 1] if k - 1 >= 0 and t_grid[k - 1] > t_cur else t_cur
        hi = t_grid[k]

        def excess(t):
            s = prop.evaluate(coeffs, np.array([t - t_cur]), dim)[:, 0]
            return np.vdot(s, s).real - r

        t_jump = optimize.brentq(excess, lo, hi, xtol=TIME_TOL, rtol=4 * np.finfo(float).eps)
        psi = prop.evaluate(coeffs, np.array([t_jump - t_cur]), dim)[:, 0]
        psi = jumps.apply(psi, rng.random())
        n_jumps += 1
        t_cur = t_jump
        r = rng.random()
        coeffs = prop.coefficients(psi)
    return sz, rate, snaps, n_jumps


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("COOPMAG_THREADS", "1")))
    except ValueError:
        return 1


def run_trajectories(
    psi0: np.ndarray,
    generator: Generator,
    channels: JumpChannels,
    t_grid: Sequence[float],
    n_traj: int,
    master_seed: int,
    snapshot_times: Sequence[float] = (),
    n_max: int = N_TRAJ_MAX,
) -> DynamicsResult:
    """Monte-Carlo wavefunction estimate of the observables on ``t_grid``.

    ``generator`` supplies ``H_eff`` (it must describe the same rate matrices
    as ``channels``). Means and standard errors are over ``n_traj``
    trajectories.
    """
    n = generator.n
    if n > n_max:
        raise DimensionTooLarge(f"trajectories are limited to N <= {n_max}, got {n}")
    if channels.n_qubits != n:
        raise DimensionMismatch("generator and channels disagree on N")
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (generator.dim,):
        raise DimensionMismatch(f"initial state shape {psi0.shape} does not match N={n}")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    snap_idx = sorted({int(np.argmin(np.abs(t_grid - s))) for s in snapshot_times})

    start = time.perf_counter()
    prop = NoJumpPropagator(generator.h_eff, n)
    jumps = _Jumps(channels)
    op_r = emission_operator(generator.gamma, generator.gamma_tilde)

    def chunk(lo: int):
        out = []
        for i in range(lo, min(lo + CHUNK, n_traj)):
            rng = np.random.default_rng(np.random.SeedSequence([int(master_seed), i]))
            out.append(_one_trajectory(psi0, prop, jumps, t_grid, rng, op_r, snap_idx))
        return out

    starts = list(range(0, n_traj, CHUNK))
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        parts = list(pool.map(chunk, starts))
    results = [r for part in parts for r in part]

    sz = np.stack([r[0] for r in results])  # (n_traj, N, T)
    rate = np.stack([r[1] for r in results])
    tot = sz.sum(axis=1)
    snaps = np.stack([r[2] for r in results]) if snap_idx else None
    jumps_total = int(sum(r[3] for r in results))

    def se(x):
        if n_traj < 2:
            return np.zeros(x.shape[1:])
        return x.std(axis=0, ddof=1) / np.sqrt(n_traj)

    snap_list = []
    if snap_idx:
        mean_c = snaps.mean(axis=0)
        snap_list = [(float(t_grid[k]), mean_c[i]) for i, k in enumerate(snap_idx)]
    return DynamicsResult(
        t_grid=t_grid,
        sigma_z_per_qubit=sz.mean(axis=0),
        emission_rate=rate.mean(axis=0),
        correlation_snapshots=snap_list,
        method="trajectories",
        trajectory_count=n_traj,
        sigma_z_se=se(sz),
        total_sigma_z_se=se(tot),
        emission_rate_se=se(rate),
        diagnostics={
            "n_jumps": jumps_total,
            "master_seed": int(master_seed),
            "wall_seconds": time.perf_counter() - start,
        },
    )
