"""Single-excitation spectrum: finite chains and the infinite-chain bands.

In the one-excitation sector the jump terms drop out and the dynamics is
generated by the complex-symmetric matrix ``H = J - i Gamma``. Its eigenvalues
are ``shift - i * decay``. For an infinite chain the lattice Fourier sums give
the bands ``J_k`` and ``Gamma_k``; ``Gamma_k`` also has a closed form by
Poisson summation which serves as an independent check.

Wavenumbers are passed as the phase ``ka`` in ``(-pi, pi]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .couplings import CouplingMatrices, coupling_Gamma
from .errors import EigensolverFailure, SingularPoint
from .params import DimensionlessConfig
from .specfun import bessel_y0


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray
    omega_offset: float = 0.0
    unit: str = "nu"


@dataclass(frozen=True)
class SingleExcitationSpectrum:
    """Eigenmodes sorted by ascending decay rate (index 0 most subradiant)."""

    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    residual: float

    @property
    def decay_rates(self) -> np.ndarray:
        return -self.eigenvalues.imag

    @property
    def shifts(self) -> np.ndarray:
        return self.eigenvalues.real

    def left_eigenvectors(self) -> np.ndarray:
        """Left eigenvectors, normalised so that ``L^dagger R = 1`` columnwise.

        For a complex-symmetric matrix they are the complex conjugates of the
        right eigenvectors up to normalisation.
        """
        r = self.right_eigenvectors
        pair = np.einsum("im,im->m", r, r)  # unconjugated inner product
        return np.conj(r / pair)


def effective_hamiltonian(C: CouplingMatrices, omega_offset: float = 0.0) -> EffectiveHamiltonian:
    """``H = J - i Gamma`` with ``omega_offset`` added to the diagonal."""
    h = C.J.astype(complex) - 1j * C.Gamma
    if omega_offset:
        h = h + omega_offset * np.eye(C.n_qubits)
    return EffectiveHamiltonian(matrix=h, omega_offset=omega_offset, unit=C.unit)


def single_excitation_modes(H: EffectiveHamiltonian, residual_tol: float = 1e-10) -> SingleExcitationSpectrum:
    m = H.matrix
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise EigensolverFailure("non-finite eigenvalues")
    v = v / np.linalg.norm(v, axis=0)
    order = np.lexsort((w.real, -w.imag))
    w, v = w[order], v[:, order]
    scale = max(np.linalg.norm(m, 2), np.finfo(float).tiny)
    res = float(np.max(np.linalg.norm(m @ v - v * w, axis=0), initial=0.0) / scale)
    if res > residual_tol:
        raise EigensolverFailure(f"eigenpair residual {res:.3g} exceeds {residual_tol:.1g}")
    return SingleExcitationSpectrum(eigenvalues=w, right_eigenvectors=v, residual=res)


# -- infinite chain ----------------------------------------------------------


@dataclass(frozen=True)
class BandStructure:
    """Bands in units of ``Gamma0``; ``ka`` is the phase per lattice site."""

    ka: np.ndarray
    J_k: Optional[np.ndarray]
    Gamma_k: np.ndarray
    n_max: int
    method: str
    last_term: float = 0.0


def hann_weights(n_max: int) -> np.ndarray:
    """Taper ``w_n`` for ``n = 1..n_max``, falling smoothly to 0 past ``n_max``."""
    n = np.arange(1, n_max + 1, dtype=float)
    return 0.5 * (1.0 + np.cos(math.pi * n / (n_max + 1)))


def _cosine_sum(c0: float, coeffs: np.ndarray, ka: float) -> float:
    n = np.arange(1, coeffs.size + 1, dtype=float)
    terms = 2.0 * coeffs * np.cos(n * ka)
    return math.fsum(np.concatenate(([c0], terms)))


def lattice_coefficients(a_over_lambda: float, cfg: DimensionlessConfig, n_max: int,
                         taper: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Tapered ``Gamma(n a)/Gamma0`` and ``J(n a)/Gamma0`` for ``n = 1..n_max``."""
    n = np.arange(1, n_max + 1, dtype=float)
    x = n * a_over_lambda
    g0 = cfg.gamma0
    g = np.asarray(coupling_Gamma(x, cfg), dtype=float) / g0
    j = 0.25 * math.pi * cfg.detuning_ratio * np.asarray(bessel_y0(x), dtype=float) / g0
    if taper:
        w = hann_weights(n_max)
        g, j = g * w, j * w
    return g, j


def band_structure_sum(ka, a_over_lambda: float, cfg: DimensionlessConfig,
                       n_max: int = 100_000, taper: bool = True) -> BandStructure:
    """Lattice sums ``J_k = sum_{n != 0} J(|n|a) e^{-inka}`` and the same for ``Gamma``.

    The real couplings make both sums cosine series. They converge only
    conditionally (the terms fall like ``n^-1/2``), so by default a Hann taper
    is applied; terms are accumulated with compensated summation.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ka_arr = np.atleast_1d(np.asarray(ka, dtype=float))
    g, j = lattice_coefficients(a_over_lambda, cfg, n_max, taper)
    gk = np.array([_cosine_sum(1.0, g, q) for q in ka_arr])
    jk = np.array([_cosine_sum(0.0, j, q) for q in ka_arr])
    return BandStructure(ka=ka_arr, J_k=jk, Gamma_k=gk, n_max=n_max, method="truncated-sum",
                         last_term=float(abs(2.0 * g[-1])))


def band_structure_grid(n_points: int, a_over_lambda: float, cfg: DimensionlessConfig,
                        n_max: int = 100_000, taper: bool = True) -> BandStructure:
    """Lattice sums on ``n_points`` equispaced phases in ``[-pi, pi)`` by FFT."""
    if n_points <= 2 * n_max:
        raise ValueError("n_points must exceed 2 n_max to avoid aliasing")
    g, j = lattice_coefficients(a_over_lambda, cfg, n_max, taper)
    spec_g = np.zeros(n_points // 2 + 1)
    spec_j = np.zeros(n_points // 2 + 1)
    spec_g[0] = 1.0
    spec_g[1:n_max + 1] = g
    spec_j[1:n_max + 1] = j
    # irfft of c_n gives c_0 + 2 sum c_n cos(2 pi n m / M) divided by M
    gk = np.fft.irfft(spec_g, n_points) * n_points
    jk = np.fft.irfft(spec_j, n_points) * n_points
    ka = 2.0 * math.pi * np.arange(n_points) / n_points
    ka = np.where(ka >= math.pi, ka - 2.0 * math.pi, ka)
    order = np.argsort(ka)
    return BandStructure(ka=ka[order], J_k=jk[order], Gamma_k=gk[order], n_max=n_max,
                         method="truncated-sum")


def _images(ka: float, a_over_lambda: float) -> np.ndarray:
    """``q lambda`` for all reciprocal images ``k + 2 pi m / a`` inside the light cone."""
    m_max = int(math.ceil((a_over_lambda + abs(ka)) / (2.0 * math.pi))) + 1
    m = np.arange(-m_max, m_max + 1)
    q = (ka + 2.0 * math.pi * m) / a_over_lambda
    return q[np.abs(q) <= 1.0]


def band_structure_poisson(ka, a_over_lambda: float, cfg: Optional[DimensionlessConfig] = None,
                           singular_tol: float = 1e-12) -> BandStructure:
    """Closed form ``Gamma_k / Gamma0 = (2 lambda / a) sum_m (1 - lambda^2 q_m^2)^-1/2``.

    ``q_m = k + 2 pi m / a`` runs over images with ``|q_m| lambda < 1``: the
    Fourier transform of ``J0(|x|/lambda)`` vanishes outside the light cone.
    ``cfg`` is accepted for symmetry with :func:`band_structure_sum` and is
    not needed because the result is normalised to ``Gamma0``.

    Raises
    ------
    SingularPoint
        If an image lies on the light cone, where the sum diverges.
    """
    ka_arr = np.atleast_1d(np.asarray(ka, dtype=float))
    out = np.empty_like(ka_arr)
    for i, q0 in enumerate(ka_arr):
        q = _images(q0, a_over_lambda)
        if np.any(1.0 - np.abs(q) < singular_tol):
            raise SingularPoint(f"ka={q0!r} puts an image on the light cone")
        out[i] = (2.0 / a_over_lambda) * math.fsum(1.0 / np.sqrt(1.0 - q * q))
    return BandStructure(ka=ka_arr, J_k=None, Gamma_k=out, n_max=0, method="poisson")


def light_cone_phases(a_over_lambda: float) -> np.ndarray:
    """Phases in ``[-pi, pi]`` where an image touches the light cone."""
    pts = []
    m_max = int(math.ceil(a_over_lambda / (2.0 * math.pi))) + 1
    for m in range(-m_max, m_max + 1):
        for s in (-1.0, 1.0):
            ka = s * a_over_lambda - 2.0 * math.pi * m
            if -math.pi <= ka <= math.pi:
                pts.append(ka)
    return np.unique(np.array(pts))


def _poisson_scalar(ka: float, a_over_lambda: float) -> float:
    q = _images(ka, a_over_lambda)
    return (2.0 / a_over_lambda) * math.fsum(1.0 / np.sqrt(np.clip(1.0 - q * q, 1e-300, None)))


def zone_average_poisson(a_over_lambda: float, tol: float = 1e-12) -> float:
    """Brillouin-zone average of the closed-form ``Gamma_k / Gamma0``.

    Integrated panelwise between light-cone crossings so the inverse
    square-root singularities sit at panel ends, where the extrapolating
    QUADPACK rule handles them.
    """
    edges = np.unique(np.concatenate(([-math.pi, math.pi], light_cone_phases(a_over_lambda))))
    parts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(_poisson_scalar, lo, hi, args=(a_over_lambda,),
                                epsabs=tol, epsrel=tol, limit=500)
        parts.append(val)
    return math.fsum(parts) / (2.0 * math.pi)


def decay_rate_sweep(a_values, n_qubits: int, cfg: DimensionlessConfig) -> dict:
    """Finite-chain spectra over lattice constants (rates in units of ``Gamma0``)."""
    from .couplings import build_coupling_matrices

    rows = {"a_over_lambda": [], "min_decay": [], "max_decay": [], "sum_decay": []}
    for a in np.asarray(a_values, dtype=float):
        c = cfg.with_lattice(float(a), n_qubits)
        C = build_coupling_matrices(c.positions(), c).in_units_of_gamma0()
        s = single_excitation_modes(effective_hamiltonian(C))
        g = s.decay_rates
        rows["a_over_lambda"].append(float(a))
        rows["min_decay"].append(float(g[0]))
        rows["max_decay"].append(float(g[-1]))
        rows["sum_decay"].append(float(math.fsum(g)))
    return {k: np.array(v) for k, v in rows.items()}
