"""Brute-force numerics: dense diagonalisation of the single-excitation
problem and exact plane-wave lattice sums I_d(k)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .core import Lattice, NumericalError, ValidationError, Wavevector
from .coupling import ModelLike, SingleAtomTerm, as_terms, coupling_from_displacement

DEGENERACY_TOL = 1e-8
RESIDUAL_TOL = 1e-8
_SUM_CHUNK = 1 << 22


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues E_n - omega0 sorted by decay rate (descending), then shift."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float

    @property
    def rates(self) -> np.ndarray:
        return -2.0 * self.eigenvalues.imag

    @property
    def shifts(self) -> np.ndarray:
        return self.eigenvalues.real

    def __len__(self):
        return self.eigenvalues.size


def _sort_order(E: np.ndarray) -> np.ndarray:
    rates = -2.0 * E.imag
    scale = max(float(np.max(np.abs(E))), 1.0)
    # rates equal to within the tolerance count as ties
    key = np.round(rates / (scale * DEGENERACY_TOL))
    return np.lexsort((E.real, -key))


def _orthonormalise_blocks(E: np.ndarray, V: np.ndarray) -> np.ndarray:
    scale = max(float(np.max(np.abs(E))), 1.0)
    n = E.size
    i = 0
    V = V.copy()
    while i < n:
        j = i + 1
        while j < n and abs(E[j] - E[i]) <= DEGENERACY_TOL * scale:
            j += 1
        if j - i > 1:
            q, _ = np.linalg.qr(V[:, i:j])
            V[:, i:j] = q
        i = j
    return V


def solve_modes(matrix, self_term: Optional[SingleAtomTerm] = None) -> SpectrumResult:
    """Diagonalise -(i/2) M.

    ``self_term`` is accepted for checking only: when given, the diagonal of
    ``matrix`` must equal its V0.
    """
    M = np.asarray(matrix)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("not_square", f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("nonfinite_matrix", "matrix has non-finite entries")
    if self_term is not None and not np.allclose(np.diag(M), self_term.V0, rtol=0, atol=1e-14):
        raise ValidationError("self_term_mismatch", "matrix diagonal differs from V0")
    H = -0.5j * M.astype(complex)
    try:
        E, V = scipy.linalg.eig(H)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"diagonalisation failed: {exc}") from exc
    V = V / np.linalg.norm(V, axis=0)
    order = _sort_order(E)
    E, V = E[order], V[:, order]
    V = _orthonormalise_blocks(E, V)
    norm_H = max(float(np.linalg.norm(H)), 1e-300)
    residual = float(np.linalg.norm(H @ V - V * E) / norm_H)
    if not math.isfinite(residual) or residual > RESIDUAL_TOL:
        raise NumericalError("eigen-decomposition residual too large", residual)
    return SpectrumResult(E, V, residual)


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    theta: float
    I: complex

    @property
    def chi(self) -> float:
        return 1.0 + self.I.real

    @property
    def shift(self) -> float:
        """Delta_k - delta_omega0 in units of gamma0."""
        return 0.5 * self.I.imag


def _site_couplings(lattice: Lattice, model: ModelLike):
    terms = as_terms(model)
    if terms[0].d != lattice.d:
        raise ValidationError("mixed_dimensions", "coupling dimension differs from lattice")
    x = lattice.coords
    keep = np.any(lattice.indices != 0, axis=1)
    x = x[keep]
    return x, coupling_from_displacement(x, terms)


def lattice_sums(lattice: Lattice, model: ModelLike, kvecs) -> np.ndarray:
    """I_d(k) = sum over sites r != 0 of V_r exp(-i k.r), for each row of ``kvecs``."""
    x, V = _site_couplings(lattice, model)
    K = np.atleast_2d(np.asarray(kvecs, dtype=float))
    if K.shape[1] != lattice.d:
        raise ValidationError("bad_components", "wavevector dimension differs from lattice")
    out = np.empty(K.shape[0], dtype=complex)
    step = max(1, _SUM_CHUNK // max(x.shape[0], 1))
    for start in range(0, K.shape[0], step):
        phase = K[start:start + step] @ x.T
        out[start:start + step] = np.exp(-1j * phase) @ V
    return out


def lattice_sum(lattice: Lattice, model: ModelLike, kvec: Wavevector) -> DispersionPoint:
    I = lattice_sums(lattice, model, kvec.vector(lattice.d)[None, :])[0]
    return DispersionPoint(k=kvec.k, theta=kvec.theta, I=complex(I))


def dispersion_scan(
    lattice: Lattice,
    model: ModelLike,
    k_min: float,
    k_max: float,
    points: int,
    theta: float = math.pi / 2,
    phi: Optional[float] = None,
) -> list:
    """Lattice sums on a uniform grid of wavenumbers along a fixed direction."""
    if not k_min < k_max:
        raise ValidationError("bad_range", f"need k_min < k_max, got {k_min}, {k_max}")
    if int(points) != points or points < 2:
        raise ValidationError("bad_points", f"need at least 2 grid points, got {points}")
    if k_min < 0:
        raise ValidationError("bad_wavenumber", "wavenumbers must be >= 0")
    ks = np.linspace(k_min, k_max, int(points))
    wvs = [Wavevector(k=float(k), theta=theta, phi=phi) for k in ks]
    K = np.array([w.vector(lattice.d) for w in wvs])
    sums = lattice_sums(lattice, model, K)
    return [DispersionPoint(k=w.k, theta=theta, I=complex(I)) for w, I in zip(wvs, sums)]
