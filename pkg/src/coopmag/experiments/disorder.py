"""Positional disorder along the chain axis."""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..errors import DisorderSamplingExhausted
from ..params import RHO_MIN

MAX_RETRIES = 1000

SeedLike = Union[int, Sequence[int]]


def sample_disordered_positions(base_positions: Sequence[float], a: float, xi: float,
                                seed: SeedLike, rho_min: float = RHO_MIN) -> np.ndarray:
    """Displace each site by an i.i.d. uniform amount in ``(-a xi / 2, a xi / 2)``.

    All lengths share one unit (lambda in the runner). A draw that brings two
    qubits closer than ``rho_min`` is discarded as a whole and redrawn.

    Raises
    ------
    DisorderSamplingExhausted
        If ``MAX_RETRIES`` consecutive draws violate the minimum separation.
    """
    base = np.asarray(base_positions, dtype=float)
    if xi < 0:
        raise ValueError("xi must be >= 0")
    if xi == 0:
        return base.copy()
    rng = np.random.default_rng(seed)
    half = 0.5 * a * xi
    for _ in range(MAX_RETRIES):
        pos = base + rng.uniform(-half, half, size=base.size)
        gaps = np.diff(np.sort(pos))
        if gaps.size == 0 or gaps.min() >= rho_min:
            return pos
    raise DisorderSamplingExhausted(
        f"no admissible sample in {MAX_RETRIES} draws (xi={xi}, rho_min={rho_min})"
    )


def realization_seed(master_seed: int, index: int) -> list[int]:
    """Entropy for realization ``index``; independent streams per index."""
    return [int(master_seed), int(index)]
