"""Domain types, unit conventions and lattice construction.

Units are fixed throughout the package: rates and shifts are measured in
units of the single-atom decay rate gamma0 (so gamma0 == 1), lengths in units
of 1/k0 and wavenumbers in units of k0.  The lattice constant therefore only
ever appears as the dimensionless product ``k0a``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

GAMMA0 = 1.0
K0 = 1.0
LAMBDA0 = 2.0 * math.pi / K0

DIMENSIONS = (1, 2, 3)


class ValidationError(ValueError):
    """Invalid input.  ``code`` is a short machine-readable reason."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class NumericalError(RuntimeError):
    """A numerical routine failed; ``residual`` carries the failure measure."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(ValueError):
    """A requested design or similarity mapping has no admissible solution."""


def check_dimension(d) -> int:
    if d not in DIMENSIONS or isinstance(d, bool):
        raise ValidationError("bad_dimension", f"dimension must be 1, 2 or 3, got {d!r}")
    return int(d)


@dataclass(frozen=True)
class LatticeSpec:
    """Simple-cubic lattice of ``m`` atoms per side in ``d`` dimensions."""

    d: int
    k0a: float
    m: int

    def __post_init__(self):
        check_dimension(self.d)
        if int(self.m) != self.m:
            raise ValidationError("non_integer_m", f"m must be an integer, got {self.m!r}")
        if self.m <= 0:
            raise ValidationError("nonpositive_m", f"m must be positive, got {self.m}")
        if self.m % 2:
            raise ValidationError("odd_m", f"m must be even, got {self.m}")
        if not math.isfinite(self.k0a) or self.k0a <= 1.0:
            raise ValidationError("not_extended", f"k0a must exceed 1, got {self.k0a}")

    @property
    def N(self) -> int:
        return int(self.m) ** self.d

    @property
    def index_range(self) -> range:
        half = int(self.m) // 2
        return range(-half + 1, half + 1)

    @classmethod
    def from_atom_count(cls, d: int, k0a: float, N: int) -> "LatticeSpec":
        d = check_dimension(d)
        m = round(N ** (1.0 / d))
        if m**d != N:
            raise ValidationError("not_a_power", f"N={N} is not a perfect {d}-th power")
        return cls(d=d, k0a=k0a, m=m)


@dataclass(frozen=True)
class LatticePosition:
    indices: tuple
    coords: tuple

    @property
    def r(self) -> float:
        return math.sqrt(sum(x * x for x in self.coords))


class Lattice(Sequence):
    """Ordered lattice sites, lexicographic in the integer indices.

    Behaves as a sequence of :class:`LatticePosition`; the ``indices`` and
    ``coords`` arrays give the same sites in vectorised form.
    """

    def __init__(self, spec: LatticeSpec):
        self.spec = spec
        rng = np.arange(spec.index_range.start, spec.index_range.stop)
        grids = np.meshgrid(*([rng] * spec.d), indexing="ij")
        self.indices = np.stack([g.ravel() for g in grids], axis=1)
        self.coords = spec.k0a * self.indices.astype(float)

    @property
    def d(self) -> int:
        return self.spec.d

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        idx = self.indices[i]
        return LatticePosition(tuple(int(n) for n in idx), tuple(float(x) for x in self.coords[i]))

    def origin_index(self) -> int:
        hits = np.flatnonzero(~self.indices.any(axis=1))
        return int(hits[0])

    def __repr__(self):
        return f"Lattice({self.spec!r})"


def build_lattice(spec: LatticeSpec) -> Lattice:
    return Lattice(spec)


def enumerate_indices(spec: LatticeSpec):
    """Plain-Python enumeration of the index tuples, in lattice order."""
    return list(itertools.product(spec.index_range, repeat=spec.d))


@dataclass(frozen=True)
class DimensionConstants:
    d: int
    b: float
    c: float
    kernel: str
    amplitude_constraint: str


def dimension_constants(d: int, theta: Optional[float] = None) -> DimensionConstants:
    """Geometry constants b_d, c_d and the radial kernel for dimension ``d``.

    ``theta`` is the polar angle between the wavevector and the dipole axis
    and is only needed for ``d == 3``.
    """
    d = check_dimension(d)
    if d == 1:
        return DimensionConstants(1, 0.5, 1.0, "cos", "real_nonnegative")
    if d == 2:
        return DimensionConstants(
            2, 1.0 / math.sqrt(math.pi), math.sqrt(2.0 * math.pi), "cos", "real_nonnegative"
        )
    if theta is None:
        raise ValidationError("missing_theta", "d=3 requires the polar angle theta")
    return DimensionConstants(
        3,
        (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0),
        2.0 * math.pi * math.sin(theta) ** 2,
        "sin",
        "imaginary_nonpositive",
    )


def equal_extent_azimuth(d: int) -> float:
    """In-plane direction along which the cube's half-width equals the
    radius of the equal-volume ball used by the continuum model.

    The lattice half-width along azimuth phi (measured from x1, |phi| <= pi/4)
    is m/(2 cos phi); equating it with b_d * m gives cos phi = 1/(2 b_d).
    """
    d = check_dimension(d)
    if d == 1:
        return 0.0
    return math.acos(1.0 / (2.0 * dimension_constants(d, math.pi / 2).b))


@dataclass(frozen=True)
class Wavevector:
    """Collective-excitation wavevector.

    ``theta`` is the polar angle to the x3 (dipole) axis and ``phi`` the
    azimuth in the x1-x2 plane.  For d = 1, 2 the lattice lies in that plane,
    so theta is pi/2.  When ``components`` is given it is authoritative and
    ``k``/``theta`` must agree with it.
    """

    k: float
    theta: float = math.pi / 2
    phi: Optional[float] = None
    components: Optional[tuple] = field(default=None)

    def __post_init__(self):
        if not math.isfinite(self.k) or self.k < 0:
            raise ValidationError("bad_wavenumber", f"k must be finite and >= 0, got {self.k}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValidationError("bad_theta", f"theta must lie in [0, pi], got {self.theta}")
        if self.components is not None:
            comp = np.asarray(self.components, dtype=float)
            mag = float(np.linalg.norm(comp))
            if abs(mag - self.k) > 1e-12 * max(mag, 1.0):
                raise ValidationError("inconsistent_wavevector", "k does not match |components|")
            if mag > 0:
                k3 = comp[2] if comp.size >= 3 else 0.0
                theta = math.acos(max(-1.0, min(1.0, k3 / mag)))
                if abs(theta - self.theta) > 1e-12 * max(theta, 1.0):
                    raise ValidationError(
                        "inconsistent_wavevector", "theta does not match components"
                    )

    @classmethod
    def from_components(cls, components) -> "Wavevector":
        comp = tuple(float(c) for c in components)
        mag = math.sqrt(sum(c * c for c in comp))
        k3 = comp[2] if len(comp) >= 3 else 0.0
        theta = math.acos(max(-1.0, min(1.0, k3 / mag))) if mag > 0 else math.pi / 2
        return cls(k=mag, theta=theta, components=comp)

    def vector(self, d: int) -> np.ndarray:
        d = check_dimension(d)
        if self.components is not None:
            comp = np.asarray(self.components, dtype=float)
            if comp.size != d:
                raise ValidationError("bad_components", f"need {d} components, got {comp.size}")
            return comp
        if d < 3 and abs(self.theta - math.pi / 2) > 1e-12:
            raise ValidationError("bad_theta", "d=1,2 lattices require theta = pi/2")
        if d == 1:
            return np.array([self.k])
        phi = equal_extent_azimuth(d) if self.phi is None else self.phi
        kpar = self.k * math.sin(self.theta)
        if d == 2:
            return np.array([kpar * math.cos(phi), kpar * math.sin(phi)])
        return np.array([kpar * math.cos(phi), kpar * math.sin(phi), self.k * math.cos(self.theta)])
