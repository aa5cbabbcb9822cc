"""Special functions and the adaptive quadrature used as an integration oracle."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import NumericalError, ValidationError

_SINC_SERIES_RADIUS = 1e-4

# Bessel J0 regimes: power series below, Miller recurrence in between,
# Hankel asymptotic expansion above.
_J0_SERIES_MAX = 8.0
_J0_ASYMPTOTIC_MIN = 25.0

# Upper incomplete gamma: power series inside this radius, continued fraction outside.
_GAMMA_SERIES_RADIUS = 2.0
_GAMMA_LEFT_SERIES_LOSS = 12.0
_GAMMA_MAX_ITER = 20000


def sinc(x):
    """sin(x)/x with the removable singularity at 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SINC_SERIES_RADIUS
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return out[()] if out.ndim == 0 else out


def bessel_j0_series(x: float) -> float:
    """Power series of J0; accurate for moderate x only."""
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * abs(total) and k > 2:
            return total
        if k > 500:
            return total


def _j0_miller(x: float) -> float:
    # Backward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, normalised by
    # 1 = J0 + 2 sum_k J_{2k}.
    start = 2 * ((int(x) + 60) // 2)
    jp1, j = 0.0, 1e-300
    norm = 0.0
    for n in range(start, 0, -1):
        jm1 = (2.0 * n / x) * j - jp1
        jp1, j = j, jm1
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j
        if abs(j) > 1e250:
            j *= 1e-250
            jp1 *= 1e-250
            norm *= 1e-250
    norm += j
    return j / norm


def _j0_asymptotic(x: float) -> float:
    # Hankel expansion J0 = sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - pi/4,
    # summed until the terms stop decreasing.
    p, q = 0.0, 0.0
    a = 1.0
    prev = math.inf
    k = 0
    while True:
        mag = abs(a)
        if mag > prev or mag < 1e-18:
            break
        if k % 2 == 0:
            p += a * (-1) ** (k // 2)
        else:
            q += a * (-1) ** (k // 2)
        prev = mag
        k += 1
        a *= -((2 * k - 1) ** 2) / (8.0 * k * x)
    # cos(x - pi/4) and sin(x - pi/4) without rounding pi/4 into x
    c, s = math.cos(x), math.sin(x)
    cchi = (c + s) / math.sqrt(2.0)
    schi = (s - c) / math.sqrt(2.0)
    return math.sqrt(2.0 / (math.pi * x)) * (p * cchi - q * schi)


def bessel_j0(x: float) -> float:
    """Bessel function J0 for x >= 0."""
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ValidationError("bad_argument", f"bessel_j0 needs finite x >= 0, got {x}")
    if x <= _J0_SERIES_MAX:
        return bessel_j0_series(x)
    if x < _J0_ASYMPTOTIC_MIN:
        return _j0_miller(x)
    return _j0_asymptotic(x)


def _lower_gamma_series(s: float, z: complex) -> complex:
    # gamma(s, z) = z^s sum_n (-z)^n / (n! (s + n))
    term = 1.0 + 0j
    total = 1.0 / s
    n = 0
    while True:
        n += 1
        term *= -z / n
        add = term / (s + n)
        total += add
        if abs(add) <= 1e-17 * abs(total) and n > abs(z):
            break
        if n > _GAMMA_MAX_ITER:
            raise NumericalError("incomplete gamma series did not converge", abs(add))
    return z**s * total


def _upper_gamma_cf(s: float, z: complex) -> complex:
    # Legendre continued fraction, modified Lentz:
    # Gamma(s, z) = e^{-z} z^s / (z + 1 - s - 1(1-s)/(z + 3 - s - 2(2-s)/(z + 5 - s - ...)))
    tiny = 1e-300
    b = z + 1.0 - s
    f = b if b != 0 else tiny
    C, D = f, 0j
    for n in range(1, _GAMMA_MAX_ITER):
        an = -n * (n - s)
        b += 2.0
        D = b + an * D
        D = 1.0 / (D if D != 0 else tiny)
        C = b + an / C
        if C == 0:
            C = tiny
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            try:
                return cmath.exp(-z + s * cmath.log(z)) / f
            except OverflowError:
                raise NumericalError("incomplete gamma overflows double precision") from None
    raise NumericalError("incomplete gamma continued fraction did not converge", abs(delta - 1.0))


def upper_incomplete_gamma(s: float, z: complex) -> complex:
    """Gamma(s, z) = int_z^inf t^(s-1) e^(-t) dt on the principal branch, 0 < s <= 3."""
    s = float(s)
    z = complex(z)
    if not 0.0 < s <= 3.0:
        raise ValidationError("unsupported_order", f"s must lie in (0, 3], got {s}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("bad_argument", "z must be finite")
    if z == 0:
        return complex(math.gamma(s))
    r = abs(z)
    # Near the negative axis the fraction is slow; the series stays usable
    # while its cancellation loss exp(|z| + Re z) is small.
    use_series = r < _GAMMA_SERIES_RADIUS or (z.real < 0 and r + z.real < _GAMMA_LEFT_SERIES_LOSS)
    if use_series:
        return math.gamma(s) - _lower_gamma_series(s, z)
    return _upper_gamma_cf(s, z)


def lower_gamma_difference(s: float, z1: complex, z2: complex) -> complex:
    """Gamma(s, z1) - Gamma(s, z2), avoiding cancellation when both are small."""
    if abs(z1) < _GAMMA_SERIES_RADIUS and abs(z2) < _GAMMA_SERIES_RADIUS:
        return _lower_gamma_series(s, z2) - _lower_gamma_series(s, z1)
    return upper_incomplete_gamma(s, z1) - upper_incomplete_gamma(s, z2)


# Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_W = np.zeros(15)
_GAUSS_W[1:7:2] = _WG[:3]
_GAUSS_W[7] = _WG[3]
_GAUSS_W[9:15:2] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 10**6
    panel_rule: str = "gk15"
    panels_per_period: float = 1.0

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValidationError("bad_tolerance", "quadrature tolerances must be positive")
        if self.panel_rule != "gk15":
            raise ValidationError("unknown_rule", f"unsupported panel rule {self.panel_rule!r}")
        if self.max_subdivisions < 1:
            raise ValidationError("bad_budget", "max_subdivisions must be >= 1")


class QuadratureError(NumericalError):
    """Subdivision budget exhausted; carries the best estimate and its error bound."""

    def __init__(self, message: str, estimate: complex, error: float):
        super().__init__(message, residual=error)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    panels: int

    def __complex__(self):
        return complex(self.value)


def estimate_frequency(kernel: Callable, lower: float, upper: float, samples: int = 4097) -> float:
    """Crude angular-frequency bound from sign changes of the sampled kernel."""
    x = np.linspace(lower, upper, samples)
    y = np.asarray(kernel(x), dtype=complex)
    crossings = 0
    for part in (y.real, y.imag):
        sgn = np.sign(part)
        sgn = sgn[sgn != 0]
        crossings = max(crossings, int(np.count_nonzero(np.diff(sgn))))
    if crossings == 0:
        return 0.0
    # two sign changes per period; pad for aliasing of the coarse sample
    return 2.0 * math.pi * (crossings / 2.0) / (upper - lower) * 2.0


def _gk15(kernel, a: np.ndarray, b: np.ndarray, omega: float = 0.0):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    f = np.asarray(kernel(x.ravel()), dtype=complex).reshape(x.shape)
    if not np.all(np.isfinite(f)):
        raise ValidationError("nonfinite_kernel", "kernel returned non-finite values")
    kron = half * (f @ _KRONROD_W)
    gauss = half * (f @ _GAUSS_W)
    # rounding floor of the panel sum; panels below it cannot be refined
    # further.  Phases omega*x carry an absolute rounding error ~ eps*omega*|x|.
    noise = 50.0 + omega * np.maximum(np.abs(a), np.abs(b))
    floor = noise * np.finfo(float).eps * np.abs(half) * (np.abs(f) @ _KRONROD_W)
    return kron, np.abs(kron - gauss), floor


def integrate_oscillatory(
    kernel: Callable,
    lower: float,
    upper: float,
    spec: QuadratureSpec = QuadratureSpec(),
    omega: Optional[float] = None,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integration of a (possibly complex) oscillatory kernel.

    ``kernel`` must accept a 1-D array.  The interval is first cut into
    panels no longer than one period of the fastest oscillation ``omega``
    (estimated from samples when not given); panels are then bisected until
    each meets its share of the tolerance.
    """
    lower, upper = float(lower), float(upper)
    if not lower < upper:
        raise ValidationError("bad_interval", f"need lower < upper, got [{lower}, {upper}]")
    if omega is None:
        omega = estimate_frequency(kernel, lower, upper)
    length = upper - lower
    if omega > 0:
        period = 2.0 * math.pi / omega
        n0 = max(1, int(math.ceil(length / period * spec.panels_per_period)))
    else:
        n0 = 1
    if n0 > spec.max_subdivisions:
        raise ValidationError("too_many_panels", "oscillation too fast for the subdivision budget")
    edges = np.linspace(lower, upper, n0 + 1)
    a, b = edges[:-1], edges[1:]

    accepted = 0j
    accepted_err = 0.0
    panels = 0
    while True:
        vals, errs, floor = _gk15(kernel, a, b, omega)
        panels += a.size
        total = accepted + vals.sum()
        budget = max(spec.abs_tol, spec.rel_tol * abs(total))
        share = budget * (b - a) / length
        ok = errs <= np.maximum(share, floor)
        accepted += vals[ok].sum()
        accepted_err += errs[ok].sum()
        if ok.all():
            return QuadratureResult(accepted, accepted_err, panels)
        a, b = a[~ok], b[~ok]
        if panels + 2 * a.size > spec.max_subdivisions:
            estimate = accepted + vals[~ok].sum()
            error = accepted_err + errs[~ok].sum()
            raise QuadratureError("subdivision budget exhausted", estimate, error)
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
