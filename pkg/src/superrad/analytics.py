"""Continuum theory of the collective rates and shifts near k = k0.

All wavenumbers are in units of k0 and lengths in units of 1/k0, so the
radial integrals run over eta = k0 r from k0a to k0a * N', with
N' = b_d N^(1/d).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .core import (
    LAMBDA0,
    LatticeSpec,
    ValidationError,
    Wavevector,
    build_lattice,
    check_dimension,
    dimension_constants,
)
from .coupling import CouplingModel
from .specfun import (
    QuadratureError,
    QuadratureSpec,
    integrate_oscillatory,
    lower_gamma_difference,
    sinc,
    upper_incomplete_gamma,
)

SMALL_N_WARNING = 100
ORACLE_GATE_RTOL = 1e-6
KINDS = ("cc", "sc", "cs", "ss")


class ContinuumWarning(UserWarning):
    """Inputs outside the regime where the continuum formulas apply."""


def superradiance_constraint(d: int, alpha: float) -> bool:
    """True iff 0 <= alpha < (d + 1)/2."""
    check_dimension(d)
    if alpha < 0:
        raise ValidationError("negative_alpha", f"alpha must be >= 0, got {alpha}")
    return alpha < (d + 1) / 2.0


def _require_constraint(d, alpha):
    if not superradiance_constraint(d, alpha):
        raise ValidationError(
            "constraint_violated", f"alpha={alpha} violates 0 <= alpha < {(d + 1) / 2} for d={d}"
        )


@dataclass(frozen=True)
class AnalyticContext:
    d: int
    alpha: float
    epsilon: int
    A_d: complex
    k0a: float
    N: float
    theta: Optional[float] = None

    def __post_init__(self):
        check_dimension(self.d)
        if self.alpha < 0:
            raise ValidationError("negative_alpha", f"alpha must be >= 0, got {self.alpha}")
        if self.epsilon not in (1, -1):
            raise ValidationError("bad_epsilon", "epsilon must be +1 or -1")
        if not self.k0a > 1:
            raise ValidationError("not_extended", f"k0a must exceed 1, got {self.k0a}")
        if not self.N > 0:
            raise ValidationError("bad_atom_count", f"N must be positive, got {self.N}")
        if self.d == 3 and self.theta is None:
            object.__setattr__(self, "theta", math.pi / 2)

    @classmethod
    def from_models(cls, spec: LatticeSpec, model: CouplingModel, theta: Optional[float] = None):
        if model.d != spec.d:
            raise ValidationError("mixed_dimensions", "coupling dimension differs from lattice")
        return cls(spec.d, model.alpha, model.epsilon, complex(model.A_d), spec.k0a, spec.N, theta)

    @property
    def constants(self):
        return dimension_constants(self.d, self.theta)

    @property
    def beta(self) -> float:
        return (self.d - 1) / 2.0 - self.alpha

    @property
    def Nprime(self) -> float:
        return self.constants.b * self.N ** (1.0 / self.d)

    @property
    def limits(self) -> tuple:
        return self.k0a, self.k0a * self.Nprime

    def xi(self, k):
        """Scaled detuning (k - k0) a b_d N^(1/d)."""
        return (np.asarray(k, dtype=float) - 1.0) * self.k0a * self.Nprime

    def k_of_xi(self, xi):
        return 1.0 + np.asarray(xi, dtype=float) / (self.k0a * self.Nprime)

    @property
    def validity_window(self) -> float:
        return math.pi / (self.k0a * self.Nprime)


def L_d(d: int, alpha: float, A_d: complex, theta: Optional[float] = None) -> float:
    """Prefactor of chi_max - 1 in its (N, volume) parameterisation."""
    _require_constraint(d, alpha)
    const = dimension_constants(d, theta if d == 3 else None)
    q = (d + 1) / 2.0 - alpha
    p = (d - 1) / 2.0 + alpha
    return 2.0 * const.b**q * const.c / (d + 1 - 2 * alpha) * abs(A_d) / (2.0 * math.pi) ** p


def chi_max(ctx: AnalyticContext) -> float:
    """Enhancement factor at k = k0."""
    _require_constraint(ctx.d, ctx.alpha)
    if ctx.N < SMALL_N_WARNING:
        warnings.warn(f"N={ctx.N} is small for the continuum limit", ContinuumWarning, stacklevel=2)
    d, alpha = ctx.d, ctx.alpha
    q = (d + 1) / 2.0 - alpha
    const = ctx.constants
    return 1.0 + (
        abs(ctx.A_d) * const.c * const.b**q / q
        * ctx.k0a ** ((1 - d) / 2.0 - alpha)
        * (ctx.N ** (1.0 / d)) ** q
    )


def chi_max_forms(ctx: AnalyticContext) -> dict:
    """chi_max - 1 from the (N, V), (V, rho) and (N, rho) parameterisations,
    with V = N a^d and rho = N / V."""
    d, alpha = ctx.d, ctx.alpha
    L = L_d(d, alpha, ctx.A_d, ctx.theta)
    p = (d - 1) / 2.0 + alpha
    q = (d + 1) / 2.0 - alpha
    volume = ctx.N * ctx.k0a**d
    rho = ctx.N / volume
    return {
        "N_V": L * (LAMBDA0 / volume ** (1.0 / d)) ** p * ctx.N,
        "V_rho": L * (LAMBDA0 / volume ** (1.0 / d)) ** p * volume * rho,
        "N_rho": L * (LAMBDA0 * rho ** (1.0 / d)) ** p * (ctx.N ** (1.0 / d)) ** q,
    }


def chi_of_xi(xi, chi_max: float):
    """Finite-size decay-rate curve 1 + (chi_max - 1) sinc(xi)."""
    return 1.0 + (chi_max - 1.0) * sinc(xi)


def shift_of_xi(xi, chi_max: float, epsilon: int = 1):
    """Finite-size shift eps (chi_max - 1)/2 (cos xi - 1)/xi, zero at xi = 0."""
    xi = np.asarray(xi, dtype=float)
    # (cos x - 1)/x = -x/2 sinc(x/2)^2, exact and smooth through 0
    curve = -0.5 * xi * sinc(0.5 * xi) ** 2
    out = epsilon * 0.5 * (chi_max - 1.0) * curve
    return out[()] if np.ndim(out) == 0 else out


def find_offset_h() -> float:
    """Positive root of xi sin(xi) + cos(xi) - 1 in (pi/2, pi): the location
    of the first shift extremum."""
    return brentq(lambda x: x * math.sin(x) + math.cos(x) - 1.0, math.pi / 2, math.pi, xtol=1e-15,
                  rtol=4 * np.finfo(float).eps)


# --- radial integrals ------------------------------------------------------


def _power_integral(beta, A, B):
    return (B ** (beta + 1) - A ** (beta + 1)) / (beta + 1)


def exp_moment(q: float, beta: float, A: float, B: float) -> complex:
    """int_A^B exp(i q eta) eta^beta d eta through the upper incomplete gamma.

    Rotating the contour onto the ray through -iq gives
    (-iq)^(-1-beta) [Gamma(1+beta, -iqA) - Gamma(1+beta, -iqB)] with principal
    powers, valid for either sign of q.
    """
    if q == 0:
        return complex(_power_integral(beta, A, B))
    s = -1j * q
    return s ** (-1.0 - beta) * lower_gamma_difference(1.0 + beta, s * A, s * B)


def exp_moment_asymptotic(q: float, beta: float, A: float, B: float) -> complex:
    """Large-B form of :func:`exp_moment`: the upper-limit gamma replaced by
    its leading term z^beta e^(-z)."""
    if q == 0:
        raise ValidationError("resonant", "the large-N form needs k != k0")
    s = -1j * q
    upper = (s * B) ** beta * cmath.exp(1j * q * B)
    return s ** (-1.0 - beta) * (upper_incomplete_gamma(1.0 + beta, s * A) - upper)


def _combine(kind: str, Em: complex, Ep: complex) -> float:
    # E(-q) = conj(E(q)) for the real weight eta^beta
    if kind == "cc":
        return 0.5 * (Em.real + Ep.real)
    if kind == "ss":
        return 0.5 * (Em.real - Ep.real)
    if kind == "sc":
        return 0.5 * (Ep.imag - Em.imag)
    if kind == "cs":
        return 0.5 * (Ep.imag + Em.imag)
    raise ValidationError("bad_kind", f"kind must be one of {KINDS}, got {kind!r}")


def _j_gamma(kind: str, kappa: float, beta: float, A: float, B: float, moment=exp_moment) -> float:
    return _combine(kind, moment(kappa - 1.0, beta, A, B), moment(kappa + 1.0, beta, A, B))


def _sin_moment0(q, A, B):
    # int_A^B sin(q eta) d eta, stable as q -> 0
    return (B - A) * math.sin(0.5 * q * (A + B)) * float(sinc(0.5 * q * (B - A)))


def _cos_moment0(q, A, B):
    return B * float(sinc(q * B)) - A * float(sinc(q * A))


def _j_beta0(kind: str, kappa: float, A: float, B: float) -> float:
    rm, rp = kappa - 1.0, kappa + 1.0
    if kind == "cc":
        return 0.5 * (_cos_moment0(rm, A, B) + _cos_moment0(rp, A, B))
    if kind == "ss":
        return 0.5 * (_cos_moment0(rm, A, B) - _cos_moment0(rp, A, B))
    if kind == "sc":
        return 0.5 * (_sin_moment0(rp, A, B) - _sin_moment0(rm, A, B))
    if kind == "cs":
        return 0.5 * (_sin_moment0(rp, A, B) + _sin_moment0(rm, A, B))
    raise ValidationError("bad_kind", f"kind must be one of {KINDS}, got {kind!r}")


_TRIG = {"c": np.cos, "s": np.sin}


def quadrature_J(kind: str, kappa: float, beta: float, A: float, B: float,
                 spec: Optional[QuadratureSpec] = None) -> float:
    """The radial integral by adaptive quadrature (independent oracle).

    The default absolute tolerance is scaled to the integrand size B^(beta+1):
    at eta ~ 10^3 the trigonometric factors carry ~1e-13 rounding noise, so a
    purely relative target cannot be met when the integral cancels strongly.
    """
    if kind not in KINDS:
        raise ValidationError("bad_kind", f"kind must be one of {KINDS}, got {kind!r}")
    if spec is None:
        scale = max(abs(B) ** (beta + 1.0), abs(A) ** (beta + 1.0))
        spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-12 * scale)
    f, g = _TRIG[kind[0]], _TRIG[kind[1]]
    res = integrate_oscillatory(
        lambda x: f(x) * g(kappa * x) * x**beta, A, B, spec, omega=1.0 + abs(kappa)
    )
    return float(res.value.real)


def j_closed(kind: str, kappa: float, beta: float, A: float, B: float,
             method: str = "gamma") -> float:
    """Closed form of int_A^B f(eta) g(kappa eta) eta^beta d eta for the four
    trigonometric kinds; ``cs`` uses the sc form with k and k0 exchanged."""
    if method == "sinc":
        evaluate = lambda kd, q, lo, hi: _j_beta0(kd, q, lo, hi)
    else:
        evaluate = lambda kd, q, lo, hi: _j_gamma(kd, q, beta, lo, hi)
    if kind == "cs":
        return kappa ** (-(beta + 1.0)) * evaluate("sc", 1.0 / kappa, kappa * A, kappa * B)
    return evaluate(kind, kappa, A, B)


@dataclass(frozen=True)
class JValue:
    value: float
    method: str
    fallback: bool = False
    oracle_deviation: Optional[float] = None
    verified: Optional[bool] = None

    def __complex__(self):
        return complex(self.value)

    def __float__(self):
        return float(self.value)


def closed_form_J(kind: str, ctx: AnalyticContext, k: float, method: str = "auto",
                  verify: Optional[bool] = None) -> JValue:
    """Radial integral J_kind(k) = int cos|sin(eta) cos|sin(k eta) eta^beta over
    [k0a, k0a N'] in closed form.

    ``method`` is ``gamma`` (incomplete-gamma form), ``sinc`` (beta = 0
    elementary form) or ``auto``.  The ``cs`` kind is obtained from the
    ``sc`` form with k and k0 exchanged.  Orders outside the supported range
    fall back to quadrature and are flagged.  With ``verify`` (default: for
    k < k0) the value is checked against quadrature and replaced, flagged, if
    they disagree beyond 1e-6.
    """
    if kind not in KINDS:
        raise ValidationError("bad_kind", f"kind must be one of {KINDS}, got {kind!r}")
    if not k > 0:
        raise ValidationError("bad_wavenumber", f"k must be positive, got {k}")
    beta = ctx.beta
    A, B = ctx.limits
    if method == "auto":
        method = "sinc" if beta == 0 else "gamma"
    if method not in ("gamma", "sinc"):
        raise ValidationError("bad_method", f"unknown method {method!r}")
    if method == "sinc" and beta != 0:
        raise ValidationError("bad_method", "the sinc form only exists for beta = 0")
    if not -1.0 < beta <= 2.0:
        return JValue(quadrature_J(kind, k, beta, A, B), "quadrature", fallback=True)

    value = j_closed(kind, k, beta, A, B, method)

    if verify is None:
        verify = k < 1.0
    if not verify:
        return JValue(value, method)
    try:
        oracle = quadrature_J(kind, k, beta, A, B)
    except QuadratureError:
        warnings.warn("quadrature oracle exceeded its budget; closed form returned unverified",
                      ContinuumWarning, stacklevel=2)
        return JValue(value, method, verified=False)
    dev = abs(value - oracle) / max(abs(oracle), 1e-300)
    if dev > ORACLE_GATE_RTOL:
        return JValue(oracle, "quadrature", fallback=True, oracle_deviation=dev, verified=False)
    return JValue(value, method, oracle_deviation=dev, verified=True)


def asymptotic_J(kind: str, ctx: AnalyticContext, k: float) -> float:
    """Large-N' forms.  For k != k0 (kinds cc, sc) the upper-limit incomplete
    gammas are replaced by their leading asymptotic term; at k = k0 (kinds cc,
    ss) the leading power (k0a N')^(beta+1) / (2(beta+1)) is returned."""
    beta = ctx.beta
    A, B = ctx.limits
    if k == 1.0:
        if kind not in ("cc", "ss"):
            raise ValidationError("bad_kind", "resonant asymptotics exist for cc and ss")
        return B ** (beta + 1.0) / (2.0 * (beta + 1.0))
    if kind not in ("cc", "sc"):
        raise ValidationError("bad_kind", "off-resonant asymptotics exist for cc and sc")
    return _j_gamma(kind, k, beta, A, B, moment=exp_moment_asymptotic)


def resonant_J_ss(ctx: AnalyticContext) -> float:
    """J_ss at k = k0 exactly: int eta^beta minus J_cc(k0)."""
    A, B = ctx.limits
    return _power_integral(ctx.beta, A, B) - _j_gamma("cc", 1.0, ctx.beta, A, B)


def _amplitude_convention(ctx: AnalyticContext) -> str:
    # Re I(k0) >= 0 needs A_d >= 0 (cos kernel) or eps*Im(A_3) <= 0 (sin kernel)
    A = complex(ctx.A_d)
    if ctx.constants.kernel == "cos":
        ok = abs(A.imag) <= 1e-14 * max(abs(A), 1.0) and A.real >= 0
    else:
        ok = abs(A.real) <= 1e-14 * max(abs(A), 1.0) and ctx.epsilon * A.imag <= 0
    return "superradiant" if ok else "nonstandard"


@dataclass(frozen=True)
class ContinuumResult:
    I: complex
    k: float
    xi: float
    validity_window: float
    method: str
    metadata: dict = field(default_factory=dict)

    @property
    def chi(self) -> float:
        return 1.0 + self.I.real

    @property
    def shift(self) -> float:
        return 0.5 * self.I.imag


def continuum_I(ctx: AnalyticContext, k: float, method: str = "closed") -> ContinuumResult:
    """I_d(k) from the continuum radial integral.

    ``method`` is ``closed`` (closed forms, quadrature fallback) or
    ``quadrature``.
    """
    _require_constraint(ctx.d, ctx.alpha)
    if not k > 0:
        raise ValidationError("bad_wavenumber", f"k must be positive, got {k}")
    window = ctx.validity_window
    if abs(k - 1.0) > window * (1.0 + 1e-9):
        warnings.warn(
            f"|k - k0| = {abs(k - 1.0):.3g} exceeds the continuum window {window:.3g}",
            ContinuumWarning,
            stacklevel=2,
        )
    const = ctx.constants
    kinds = ("cc", "sc") if const.kernel == "cos" else ("cs", "ss")
    beta = ctx.beta
    A, B = ctx.limits
    flagged = False
    if method == "quadrature":
        parts = [quadrature_J(kd, k, beta, A, B) for kd in kinds]
        used = "quadrature"
    elif method == "closed":
        vals = [closed_form_J(kd, ctx, k) for kd in kinds]
        parts = [v.value for v in vals]
        flagged = any(v.fallback for v in vals)
        used = "+".join(sorted({v.method for v in vals}))
    else:
        raise ValidationError("bad_method", f"unknown method {method!r}")
    J = parts[0] + 1j * ctx.epsilon * parts[1]
    pref = 2.0 * const.c / ctx.k0a**ctx.d * k ** (-(ctx.d - 1) / 2.0)
    I = pref * complex(ctx.A_d) * J
    meta = {
        "beta": beta,
        "kernel": const.kernel,
        "fallback": flagged,
        "amplitude_convention": _amplitude_convention(ctx),
    }
    return ContinuumResult(I=I, k=float(k), xi=float(ctx.xi(k)), validity_window=window,
                           method=used, metadata=meta)


# --- scaling of chi_max with N from lattice sums ------------------------------


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    expected: float
    atom_counts: tuple
    excess: tuple


def scaling_exponent_check(d: int, alpha: float, N_list, k0a: float = 3.0,
                           amplitude: float = 1.0, epsilon: int = 1,
                           theta: float = math.pi / 2) -> ScalingFit:
    """Least-squares slope of log(chi(k0) - 1) against log N from lattice sums."""
    from .spectrum import lattice_sum

    _require_constraint(d, alpha)
    Ns = sorted(int(n) for n in N_list)
    if len(Ns) < 3:
        raise ValidationError("too_few_points", "need at least three atom counts")
    if Ns[-1] < 10 * Ns[0]:
        raise ValidationError("narrow_range", "atom counts must span at least one decade")
    A = -1j * epsilon * amplitude if d == 3 else amplitude
    model = CouplingModel(A_d=A, alpha=alpha, epsilon=epsilon, d=d)
    excess = []
    for n in Ns:
        lattice = build_lattice(LatticeSpec.from_atom_count(d, k0a, n))
        excess.append(lattice_sum(lattice, model, Wavevector(k=1.0, theta=theta)).I.real)
    excess = np.array(excess)
    if np.any(excess <= 0):
        raise ValidationError("not_superradiant", "chi(k0) - 1 is not positive for all N")
    slope = float(np.polyfit(np.log(Ns), np.log(excess), 1)[0])
    return ScalingFit(slope, ((d + 1) / 2.0 - alpha) / d, tuple(Ns), tuple(excess.tolist()))
