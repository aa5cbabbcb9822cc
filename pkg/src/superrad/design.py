"""Inverse design of an artificial transition, scaling transformations of
the enhancement factor and the similarity classes of (d, alpha)."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .analytics import (
    SMALL_N_WARNING,
    AnalyticContext,
    ContinuumWarning,
    chi_max,
    chi_of_xi,
    shift_of_xi,
    superradiance_constraint,
)
from .core import InfeasibleError, ValidationError, check_dimension, dimension_constants
from .specfun import sinc

FREE_PARAMETERS = ("N", "k0a", "A", "alpha")


@dataclass(frozen=True)
class DesignTarget:
    """Requested collective decay rate and shift (units of gamma0, shift
    relative to delta_omega0) together with the fixed system parameters.

    Exactly one of ``N``, ``k0a``, ``A`` (|A_d|) and ``alpha`` is solved for;
    it is named by ``free`` and its given value, if any, is ignored.
    """

    gamma_target: float
    delta_target: float = 0.0
    d: int = 1
    alpha: float = 0.0
    epsilon: int = 1
    A: float = 1.0
    k0a: float = 3.0
    N: Optional[int] = None
    free: str = "N"
    theta: float = math.pi / 2

    def __post_init__(self):
        check_dimension(self.d)
        if self.free not in FREE_PARAMETERS:
            raise ValidationError("bad_free", f"free must be one of {FREE_PARAMETERS}")
        if not math.isfinite(self.gamma_target) or not math.isfinite(self.delta_target):
            raise ValidationError("bad_target", "targets must be finite")
        if self.gamma_target < 1.0:
            raise ValidationError("subradiant_target", "gamma_target < gamma0 is not supported")
        if self.epsilon not in (1, -1):
            raise ValidationError("bad_epsilon", "epsilon must be +1 or -1")
        if self.free != "N" and self.N is None:
            raise ValidationError("missing_N", "N must be fixed unless it is the free parameter")
        if self.A < 0:
            raise ValidationError("bad_amplitude", "|A_d| must be >= 0")


@dataclass(frozen=True)
class DesignSolution:
    xi: float
    chi_max: float
    d: int
    alpha: float
    epsilon: int
    A: float
    k0a: float
    N: int
    m: int
    k: float
    exact_value: float
    residual_rate: float
    residual_shift: float
    sensitivity: float
    warnings: tuple = field(default_factory=tuple)

    @property
    def A_d(self) -> complex:
        """Signed amplitude in the per-dimension convention."""
        return -1j * self.epsilon * self.A if self.d == 3 else complex(self.A)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["warnings"] = list(self.warnings)
        return out


def ratio_to_xi(gamma_target: float, delta_target: float, epsilon: int = 1) -> float:
    """Scaled detuning giving shift/(chi - 1) = delta/(gamma - 1).

    On the finite-size curves the ratio is -eps tan(xi/2)/2, so
    xi = -2 eps arctan(2 rho) on the branch |xi| < pi where sinc(xi) > 0.
    """
    excess = gamma_target - 1.0
    if excess <= 0:
        if delta_target == 0:
            raise InfeasibleError("gamma_target = gamma0 needs no enhancement (chi_max = 1)")
        raise InfeasibleError("a shift without excess decay requires |xi| >= pi")
    rho = delta_target / excess
    return -2.0 * epsilon * math.atan(2.0 * rho) + 0.0


def _excess(d, alpha, A, k0a, N, theta):
    ctx = AnalyticContext(d, alpha, 1, A if d < 3 else -1j * A, k0a, N, theta if d == 3 else None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContinuumWarning)
        return chi_max(ctx) - 1.0


def nearest_lattice_count(N_real: float, d: int) -> tuple:
    """Nearest N = m^d with m even and >= 2, compared on the side length."""
    side = N_real ** (1.0 / d)
    m = max(2, 2 * int(round(side / 2.0)))
    return m**d, m


def solve_design(target: DesignTarget) -> DesignSolution:
    """Resolve the free parameter so the finite-size curves hit the target."""
    t = target
    if not superradiance_constraint(t.d, t.alpha) and t.free != "alpha":
        raise ValidationError("constraint_violated", f"alpha={t.alpha} violates the superradiance bound")
    xi = ratio_to_xi(t.gamma_target, t.delta_target, t.epsilon)
    s = float(sinc(xi))
    if s <= 0:
        raise InfeasibleError(f"|xi| = {abs(xi)} >= pi has no superradiant solution")
    cmax = 1.0 + (t.gamma_target - 1.0) / s
    need = cmax - 1.0
    notes = []
    d, alpha, A, k0a, N = t.d, t.alpha, t.A, t.k0a, t.N
    q = (d + 1) / 2.0 - alpha

    if t.free == "N":
        if A == 0:
            raise InfeasibleError("zero coupling cannot produce enhancement")
        per_unit = _excess(d, alpha, A, k0a, 1.0, t.theta)
        exact = (need / per_unit) ** (d / q)
        N, m = nearest_lattice_count(exact, d)
    elif t.free == "k0a":
        expo = (1 - d) / 2.0 - alpha
        if expo == 0:
            raise InfeasibleError("chi_max does not depend on k0a for d=1, alpha=0")
        ref = 2.0
        base = _excess(d, alpha, A, ref, N, t.theta)
        exact = ref * (need / base) ** (1.0 / expo)
        if not exact > 1.0:
            raise InfeasibleError(f"required k0a = {exact:.4g} is not an extended sample")
        k0a = exact
    elif t.free == "A":
        exact = need / _excess(d, alpha, 1.0, k0a, N, t.theta)
        A = exact
    else:
        g = lambda a: _excess(d, a, A, k0a, N, t.theta) - need
        # chi_max is not monotonic in alpha near the bound: bracket the
        # smallest root on a grid
        grid = np.linspace(0.0, (d + 1) / 2.0, 401)[:-1]
        vals = np.array([g(a) for a in grid])
        hits = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
        if hits.size == 0:
            raise InfeasibleError("no alpha within the superradiance bound reaches the target")
        i = int(hits[0])
        exact = brentq(g, grid[i], grid[i + 1], xtol=1e-14)
        alpha = exact
    if t.free != "N":
        m = round(N ** (1.0 / d))

    if N < SMALL_N_WARNING:
        notes.append(f"N={N} is below {SMALL_N_WARNING}; continuum curves are unreliable")
        warnings.warn(notes[-1], ContinuumWarning, stacklevel=2)

    realised = 1.0 + _excess(d, alpha, A, k0a, N, t.theta)
    rate = float(chi_of_xi(xi, realised))
    shift = float(shift_of_xi(xi, realised, t.epsilon))
    b = dimension_constants(d, t.theta if d == 3 else None).b
    k = 1.0 + xi / (k0a * b * N ** (1.0 / d))
    # d chi / d N at fixed xi
    sensitivity = s * (realised - 1.0) * q / (d * N)
    return DesignSolution(
        xi=xi, chi_max=cmax, d=d, alpha=alpha, epsilon=t.epsilon, A=A, k0a=k0a, N=int(N), m=int(m),
        k=k, exact_value=float(exact), residual_rate=rate - t.gamma_target,
        residual_shift=shift - t.delta_target, sensitivity=sensitivity, warnings=tuple(notes),
    )


def forward(solution: DesignSolution, exact: bool = False) -> tuple:
    """(rate, shift) of the finite-size curves at the solution's xi; with
    ``exact`` the unrounded chi_max is used."""
    if exact:
        c = solution.chi_max
    else:
        c = 1.0 + _excess(solution.d, solution.alpha, solution.A, solution.k0a, solution.N,
                          math.pi / 2)
    return float(chi_of_xi(solution.xi, c)), float(shift_of_xi(solution.xi, c, solution.epsilon))


def transform_chi(chi: float, f_N: float, f_V: float, d: int, alpha: float) -> float:
    """Enhancement factor after N -> f_N N and volume -> f_V V."""
    check_dimension(d)
    if f_N <= 0 or f_V <= 0:
        raise ValidationError("bad_factor", "scaling factors must be positive")
    return f_N * f_V ** ((1.0 - d - 2.0 * alpha) / (2.0 * d)) * chi


@dataclass(frozen=True)
class Similarity:
    alpha_prime: float
    feasible: bool
    reason: str = ""


def similar_alpha(d: int, alpha: float, d_prime: int) -> Similarity:
    """Exponent alpha' for which a d'-dimensional sample obeys the same
    scaling law as (d, alpha): (alpha - 1/2)/d = (alpha' - 1/2)/d'."""
    check_dimension(d)
    check_dimension(d_prime)
    alpha_prime = 0.5 + d_prime * (alpha - 0.5) / d
    if alpha_prime < 0:
        return Similarity(alpha_prime, False, "alpha' < 0")
    if not superradiance_constraint(d_prime, alpha_prime):
        return Similarity(alpha_prime, False, "alpha' violates the superradiance bound")
    return Similarity(alpha_prime, True)


def dicke_compatible(d: int, alpha: float) -> bool:
    """Whether extended-sample scaling reproduces chi -> f_N chi of a Dicke system."""
    check_dimension(d)
    return alpha == (1 - d) / 2.0 and alpha >= 0
