"""Pairwise couplings V_r/gamma0 = A sin^2(theta) exp(eps i k0 r) / (k0 r)^alpha
and assembly of the dense coupling matrix of the single-excitation problem."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import GAMMA0, Lattice, LatticePosition, ValidationError, check_dimension

DEFAULT_MAX_ATOMS = 8192


@dataclass(frozen=True)
class CouplingModel:
    """One power-law coupling term.

    ``A_d`` follows the per-dimension sign convention: real and >= 0 for
    d = 1, 2; purely imaginary for d = 3 with eps * Im(A_3) <= 0, which is
    Im <= 0 for the usual outgoing phase eps = +1 and its mirror for eps = -1.
    ``custom=True`` lifts the constraint.

    For d = 2 the continuum treatment folds the pi/4 phase of the Bessel
    asymptote into A_2.  With ``absorb_hankel_phase`` (the default for d = 2)
    the lattice amplitude carries the compensating factor exp(-i eps pi/4),
    so a real A_2 here means the same thing as a real A_2 in the continuum
    formulas.
    """

    A_d: complex
    alpha: float
    epsilon: int = 1
    d: int = 1
    custom: bool = False
    absorb_hankel_phase: bool = True

    def __post_init__(self):
        check_dimension(self.d)
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValidationError("negative_alpha", f"alpha must be >= 0, got {self.alpha}")
        if self.epsilon not in (1, -1):
            raise ValidationError("bad_epsilon", f"epsilon must be +1 or -1, got {self.epsilon}")
        A = complex(self.A_d)
        if not (math.isfinite(A.real) and math.isfinite(A.imag)):
            raise ValidationError("bad_amplitude", "A_d must be finite")
        if self.custom:
            return
        tol = 1e-14 * max(abs(A), 1.0)
        if self.d in (1, 2):
            if abs(A.imag) > tol or A.real < 0:
                raise ValidationError(
                    "amplitude_constraint", f"d={self.d} requires real A_d >= 0, got {A}"
                )
        else:
            if abs(A.real) > tol or self.epsilon * A.imag > 0:
                raise ValidationError(
                    "amplitude_constraint",
                    f"d=3 requires imaginary A_3 with eps*Im(A_3) <= 0, got {A} (eps={self.epsilon})",
                )

    @property
    def lattice_amplitude(self) -> complex:
        A = complex(self.A_d)
        if self.d == 2 and self.absorb_hankel_phase:
            return A * cmath.exp(-1j * self.epsilon * math.pi / 4)
        return A

    def radial(self, r):
        """exp(eps i r)/r^alpha * lattice amplitude, without the angular factor."""
        r = np.asarray(r, dtype=float)
        return self.lattice_amplitude * np.exp(self.epsilon * 1j * r) / r**self.alpha


ModelLike = Union[CouplingModel, Sequence[CouplingModel]]


def as_terms(model: ModelLike) -> list:
    terms = [model] if isinstance(model, CouplingModel) else list(model)
    if not terms:
        raise ValidationError("no_coupling", "at least one coupling term is required")
    dims = {t.d for t in terms}
    if len(dims) != 1:
        raise ValidationError("mixed_dimensions", "coupling terms disagree on dimension")
    return terms


@dataclass(frozen=True)
class SingleAtomTerm:
    """V0 = gamma0 + 2i delta_omega0, with gamma0 = 1 by the unit convention."""

    delta_omega0: float = 0.0
    gamma0: float = GAMMA0

    def __post_init__(self):
        if self.gamma0 != GAMMA0:
            raise ValidationError("gamma0_fixed", "gamma0 is the rate unit and must equal 1")
        if not math.isfinite(self.delta_omega0):
            raise ValidationError("bad_shift", "delta_omega0 must be finite")

    @property
    def V0(self) -> complex:
        return complex(self.gamma0, 2.0 * self.delta_omega0)


def coupling_from_displacement(dx: np.ndarray, model: ModelLike) -> np.ndarray:
    """Coupling for displacement vectors ``dx`` of shape (..., d), units 1/k0."""
    terms = as_terms(model)
    dx = np.asarray(dx, dtype=float)
    r = np.sqrt(np.sum(dx * dx, axis=-1))
    if np.any(r == 0):
        raise ValidationError("coincident_sites", "coupling is undefined at r = 0")
    d = terms[0].d
    if d == 3:
        angular = 1.0 - (dx[..., 2] / r) ** 2
    else:
        angular = 1.0
    total = np.zeros(r.shape, dtype=complex)
    for term in terms:
        total += term.radial(r)
    return angular * total


def pair_coupling(ri: LatticePosition, rj: LatticePosition, model: ModelLike) -> complex:
    dx = np.subtract(ri.coords, rj.coords)
    return complex(coupling_from_displacement(dx, model))


def _offset_table(lattice: Lattice, model: ModelLike):
    """Coupling for every index offset in [-(m-1), m-1]^d, origin set to 0."""
    spec = lattice.spec
    span = np.arange(-(spec.m - 1), spec.m)
    grids = np.meshgrid(*([span] * spec.d), indexing="ij")
    offsets = np.stack(grids, axis=-1).astype(float)
    origin = (spec.m - 1,) * spec.d
    offsets[origin] = 1.0
    table = coupling_from_displacement(spec.k0a * offsets, model)
    table[origin] = 0.0
    return table, spec.m - 1


def coupling_matrix(
    lattice: Lattice,
    model: ModelLike,
    self_term: SingleAtomTerm = SingleAtomTerm(),
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> np.ndarray:
    """Dense N x N matrix with V0 on the diagonal and V_{r_i r_j} elsewhere.

    Couplings depend on the site offset only, so they are tabulated once per
    offset and gathered into the matrix.
    """
    n = len(lattice)
    if n > max_atoms:
        raise ValidationError("too_many_atoms", f"N={n} exceeds the dense limit {max_atoms}")
    if any(t.d != lattice.d for t in as_terms(model)):
        raise ValidationError("mixed_dimensions", "coupling dimension differs from lattice")
    table, shift = _offset_table(lattice, model)
    idx = lattice.indices
    M = np.empty((n, n), dtype=complex)
    for i in range(n):
        off = idx[i] - idx + shift
        M[i] = table[tuple(off.T)]
    M[np.diag_indices(n)] = self_term.V0
    return M


def dicke_matrix(N: int, self_term: SingleAtomTerm = SingleAtomTerm()) -> np.ndarray:
    """Small-volume limit: every pair (and every atom with itself) couples with V0."""
    if int(N) != N or N <= 0:
        raise ValidationError("bad_atom_count", f"N must be a positive integer, got {N}")
    return np.full((int(N), int(N)), self_term.V0, dtype=complex)


def preset(kind: str, magnitude: float, d: int = None, epsilon: int = 1) -> CouplingModel:
    """Couplings of the three standard environments, with user-supplied |A_d|.

    ``kind`` is one of ``waveguide`` (d=1, alpha=0), ``planar`` (d=2,
    alpha=1/2) or ``free_space`` (d=3, alpha=1).
    """
    table = {"waveguide": (1, 0.0), "planar": (2, 0.5), "free_space": (3, 1.0)}
    if kind not in table:
        raise ValidationError("unknown_preset", f"unknown preset {kind!r}")
    dim, alpha = table[kind]
    if d is not None and d != dim:
        raise ValidationError("preset_dimension", f"preset {kind} is d={dim}")
    if magnitude < 0:
        raise ValidationError("bad_amplitude", "magnitude must be >= 0")
    A = -1j * epsilon * magnitude if dim == 3 else magnitude
    return CouplingModel(A_d=A, alpha=alpha, epsilon=epsilon, d=dim)
