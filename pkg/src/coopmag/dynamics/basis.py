"""Computational basis of N two-level systems and collective pair operators.

Basis index ``i`` encodes qubit ``alpha`` in bit ``N - 1 - alpha`` so that a
vector reshaped to ``(2,) * N`` has qubit ``alpha`` on axis ``alpha``. Bit 1 is
the excited state (``sigma_z = +1``); ``sigma^-`` lowers it.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import sparse

from ..errors import DimensionMismatch


@lru_cache(maxsize=32)
def bit_table(n: int) -> np.ndarray:
    """``(2^N, N)`` array of occupation bits, read-only."""
    idx = np.arange(2**n)
    shifts = n - 1 - np.arange(n)
    bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)
    bits.setflags(write=False)
    return bits


@lru_cache(maxsize=32)
def excitation_number(n: int) -> np.ndarray:
    out = bit_table(n).sum(axis=1).astype(np.int64)
    out.setflags(write=False)
    return out


def sectors(n: int) -> list[np.ndarray]:
    """Basis indices grouped by excitation number ``0..N``."""
    ne = excitation_number(n)
    return [np.flatnonzero(ne == k) for k in range(n + 1)]


def n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return n


def pair_operator(m: np.ndarray, kind: str) -> sparse.csr_matrix:
    """Sparse ``sum_{ab} m_ab s_a^+ s_b^-`` (``kind="raise_lower"``) or ``s_a^- s_b^+``.

    Diagonal terms are the number operator ``n_a`` and ``1 - n_a``
    respectively.
    """
    m = np.asarray(m)
    n = m.shape[0]
    bits = bit_table(n)
    dim = 2**n
    idx = np.arange(dim)
    rows, cols, vals = [], [], []
    up = 1 if kind == "raise_lower" else 0  # bit value of a that the operator creates
    if kind not in ("raise_lower", "lower_raise"):
        raise ValueError(kind)
    diag = np.zeros(dim, dtype=m.dtype)
    for a in range(n):
        occ = bits[:, a] if up else 1 - bits[:, a]
        diag = diag + m[a, a] * occ
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    for a in range(n):
        pa = 1 << (n - 1 - a)
        for b in range(n):
            if a == b or m[a, b] == 0:
                continue
            pb = 1 << (n - 1 - b)
            if up:
                src = idx[(bits[:, b] == 1) & (bits[:, a] == 0)]
                dst = src - pb + pa
            else:
                src = idx[(bits[:, a] == 1) & (bits[:, b] == 0)]
                dst = src - pa + pb
            rows.append(dst)
            cols.append(src)
            vals.append(np.full(src.size, m[a, b], dtype=m.dtype))
    out = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    out.sum_duplicates()
    return out


def lowering(n: int, a: int) -> sparse.csr_matrix:
    """``sigma^-`` on qubit ``a``."""
    bits = bit_table(n)
    src = np.flatnonzero(bits[:, a] == 1)
    dst = src - (1 << (n - 1 - a))
    return sparse.csr_matrix((np.ones(src.size), (dst, src)), shape=(2**n, 2**n))


def product_state(excited) -> np.ndarray:
    """Basis vector with the given qubits excited (sequence of 0/1)."""
    excited = [int(b) for b in excited]
    n = len(excited)
    idx = 0
    for a, b in enumerate(excited):
        idx |= b << (n - 1 - a)
    psi = np.zeros(2**n, dtype=complex)
    psi[idx] = 1.0
    return psi


def all_excited(n: int) -> np.ndarray:
    return product_state([1] * n)
