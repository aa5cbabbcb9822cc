"""Cross-checks between the brute-force numerics and the analytic layer.

Each suite returns a plain dict with a ``passed`` flag and the measured
quantities, so the CLI can serialise it directly.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .analytics import (
    AnalyticContext,
    ContinuumWarning,
    chi_max,
    find_offset_h,
    j_closed,
    quadrature_J,
    scaling_exponent_check,
)
from .core import LatticeSpec, Wavevector, build_lattice
from .coupling import CouplingModel, SingleAtomTerm, coupling_matrix, dicke_matrix
from .design import DesignTarget, forward, solve_design
from .spectrum import lattice_sum, lattice_sums, solve_modes

SUITES = ("trace", "dicke", "collapse", "closedform", "roundtrip", "scaling")

COLLAPSE_TOL = 0.05
CLOSEDFORM_TOL = 1e-6
SINC_IDENTITY_TOL = 1e-10
TRACE_TOL = 1e-9
DICKE_TOL = 1e-10
ROUNDTRIP_TOL = 1e-9
CLOSURE_TOL = 0.10
SLOPE_TOL = 0.03

COLLAPSE_CASES = {1: dict(alpha=0.0, m=4000), 2: dict(alpha=0.5, m=200)}
SCALING_CASES = {
    (1, 0.0): (250, 500, 1000, 2000, 4000),
    (1, 0.5): (250, 500, 1000, 2000, 4000),
    (2, 0.5): (400, 1600, 3600, 6400, 10000),
}


# --- finite-size curve collapse ---------------------------------------------


@dataclass(frozen=True)
class Collapse:
    xi: np.ndarray
    chi_hat: np.ndarray
    shift_hat: np.ndarray
    chi_error: float
    shift_error: float


def reference_curves(xi):
    """sinc(xi) and (cos xi - 1)/(2 xi), the latter written to stay smooth at 0."""
    xi = np.asarray(xi, dtype=float)
    return np.sinc(xi / np.pi), -0.25 * xi * np.sinc(xi / (2 * np.pi)) ** 2


def collapse_curves(d: int, alpha: float, m: int, k0a: float = 3.0, A: float = 1.0,
                    xi_max: float = 3 * math.pi, points: int = 241) -> Collapse:
    """Lattice sums rescaled by the continuum chi_max - 1.

    chi_hat = (chi - 1)/(chi_max - 1) and shift_hat = shift/(chi_max - 1), so
    the reference curves are sinc(xi) and (cos xi - 1)/(2 xi).  Errors are
    sup-norm absolute deviations on these normalised curves.
    """
    spec = LatticeSpec(d, k0a, m)
    model = CouplingModel(A_d=A, alpha=alpha, d=d)
    ctx = AnalyticContext.from_models(spec, model)
    scale = chi_max(ctx) - 1.0
    xi = np.linspace(-xi_max, xi_max, points)
    ks = ctx.k_of_xi(xi)
    K = np.array([Wavevector(k=float(k)).vector(d) for k in ks])
    I = lattice_sums(build_lattice(spec), model, K)
    chi_hat = I.real / scale
    shift_hat = 0.5 * I.imag / scale
    ref_chi, ref_shift = reference_curves(xi)
    return Collapse(
        xi, chi_hat, shift_hat,
        float(np.max(np.abs(chi_hat - ref_chi))),
        float(np.max(np.abs(shift_hat - ref_shift))),
    )


def shift_extrema(d: int = 1, alpha: float = 0.0, m: int = 4000, k0a: float = 3.0,
                  A: float = 1.0) -> tuple:
    """xi of the minimum and maximum of the lattice-sum shift within |xi| < pi."""
    spec = LatticeSpec(d, k0a, m)
    model = CouplingModel(A_d=A, alpha=alpha, d=d)
    ctx = AnalyticContext.from_models(spec, model)
    lattice = build_lattice(spec)

    def shift(x):
        k = float(ctx.k_of_xi(x))
        return 0.5 * lattice_sum(lattice, model, Wavevector(k=k)).I.imag

    lo = minimize_scalar(shift, bounds=(0.0, math.pi), method="bounded",
                         options={"xatol": 1e-6})
    hi = minimize_scalar(lambda x: -shift(x), bounds=(-math.pi, 0.0), method="bounded",
                         options={"xatol": 1e-6})
    return float(lo.x), float(hi.x)


def resonant_shift(d: int = 1, alpha: float = 0.0, m: int = 4000, k0a: float = 3.0,
                   A: float = 1.0) -> float:
    """shift_hat at k = k0 from the lattice sum."""
    spec = LatticeSpec(d, k0a, m)
    model = CouplingModel(A_d=A, alpha=alpha, d=d)
    ctx = AnalyticContext.from_models(spec, model)
    p = lattice_sum(build_lattice(spec), model, Wavevector(k=1.0))
    return p.shift / (chi_max(ctx) - 1.0)


# --- suites --------------------------------------------------------------------


def _random_model(rng, d):
    bound = (d + 1) / 2.0
    alpha = float(rng.uniform(0.0, min(bound, 1.5) - 0.05))
    mag = float(rng.uniform(0.1, 2.0))
    eps = int(rng.choice([1, -1]))
    A = -1j * eps * mag if d == 3 else mag
    return CouplingModel(A_d=A, alpha=alpha, epsilon=eps, d=d)


def suite_trace(seed: int = 0, configs: int = 20) -> dict:
    rng = np.random.default_rng(seed)
    sizes = {1: (2, 200), 2: (2, 16), 3: (2, 6)}
    rows = []
    for _ in range(configs):
        d = int(rng.integers(1, 4))
        lo, hi = sizes[d]
        m = 2 * int(rng.integers(lo // 2, hi // 2 + 1))
        k0a = float(rng.uniform(1.2, 8.0))
        model = _random_model(rng, d)
        delta0 = float(rng.uniform(-2.0, 2.0))
        lattice = build_lattice(LatticeSpec(d, k0a, m))
        res = solve_modes(coupling_matrix(lattice, model, SingleAtomTerm(delta0)))
        N = len(lattice)
        err_rate = abs(res.rates.sum() - N) / N
        err_shift = abs(res.shifts.sum() - N * delta0) / (N * max(abs(delta0), 1.0))
        rows.append(dict(d=d, alpha=model.alpha, k0a=k0a, m=m, delta_omega0=delta0,
                         rate_error=err_rate, shift_error=err_shift))
    worst = max(max(r["rate_error"], r["shift_error"]) for r in rows)
    return dict(suite="trace", passed=worst < TRACE_TOL, max_error=worst, tolerance=TRACE_TOL,
                configs=rows)


def suite_dicke(sizes=(2, 16, 256), delta_omega0: float = 0.3) -> dict:
    rows = []
    ok = True
    for N in sizes:
        res = solve_modes(dicke_matrix(N, SingleAtomTerm(delta_omega0)))
        bright = abs(res.rates[0] - N) / N
        dark = float(np.max(np.abs(res.rates[1:])))
        shift = abs(res.shifts[0] - N * delta_omega0) / (N * abs(delta_omega0))
        good = bright < DICKE_TOL and dark < DICKE_TOL and shift < DICKE_TOL
        ok &= good
        rows.append(dict(N=N, bright_error=bright, max_dark_rate=dark, shift_error=shift,
                         passed=good))
    return dict(suite="dicke", passed=bool(ok), tolerance=DICKE_TOL, cases=rows)


def suite_collapse(cases=None, xi_max: float = 3 * math.pi, points: int = 241) -> dict:
    cases = COLLAPSE_CASES if cases is None else cases
    rows = []
    for d, kw in cases.items():
        t0 = time.perf_counter()
        c = collapse_curves(d, kw["alpha"], kw["m"], xi_max=xi_max, points=points)
        rows.append(dict(d=d, alpha=kw["alpha"], m=kw["m"], chi_error=c.chi_error,
                         shift_error=c.shift_error, seconds=time.perf_counter() - t0,
                         passed=max(c.chi_error, c.shift_error) < COLLAPSE_TOL))
    return dict(suite="collapse", passed=all(r["passed"] for r in rows),
                tolerance=COLLAPSE_TOL, cases=rows)


def suite_closedform(betas=(-0.5, 0.0, 0.5, 1.0),
                     kappas=(0.98, 1 - 1e-6, 1 + 1e-6, 1.02),
                     nprimes=(50, 500), k0a: float = 3.0) -> dict:
    cells = []
    worst_sinc = 0.0
    for beta, kappa, Np in itertools.product(betas, kappas, nprimes):
        A, B = k0a, k0a * Np
        for kind in ("cc", "sc", "cs", "ss"):
            closed = j_closed(kind, kappa, beta, A, B)
            oracle = quadrature_J(kind, kappa, beta, A, B)
            err = abs(closed - oracle) / abs(oracle)
            cells.append(dict(kind=kind, beta=beta, kappa=kappa, Nprime=Np, closed=closed,
                              quadrature=oracle, rel_error=err))
            if beta == 0.0:
                sinc_form = j_closed(kind, kappa, 0.0, A, B, method="sinc")
                worst_sinc = max(worst_sinc, abs(sinc_form - closed) / abs(closed))
    worst = max(c["rel_error"] for c in cells)
    return dict(suite="closedform", passed=worst < CLOSEDFORM_TOL and worst_sinc < SINC_IDENTITY_TOL,
                max_rel_error=worst, tolerance=CLOSEDFORM_TOL, sinc_identity_error=worst_sinc,
                sinc_tolerance=SINC_IDENTITY_TOL, cells=cells)


def random_targets(seed: int, count: int = 200) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        gamma = 1.0 + float(rng.uniform(1e-3, 999.0))
        rho = float(rng.uniform(-5.0, 5.0))
        d = int(rng.integers(1, 4))
        alpha = float(rng.uniform(0.0, (d + 1) / 2.0 - 0.1))
        out.append(DesignTarget(gamma, rho * (gamma - 1.0), d=d, alpha=alpha,
                                epsilon=int(rng.choice([1, -1])),
                                A=float(rng.uniform(0.2, 3.0)), k0a=float(rng.uniform(1.5, 6.0))))
    return out


def design_closure(gamma: float = 500.0, delta: float = -200.0) -> dict:
    """Designed d=1 transition checked against the lattice sum at the designed k."""
    sol = solve_design(DesignTarget(gamma, delta, d=1, alpha=0.0, A=1.0, k0a=3.0))
    lattice = build_lattice(LatticeSpec(1, sol.k0a, sol.m))
    model = CouplingModel(A_d=sol.A, alpha=sol.alpha, epsilon=sol.epsilon, d=1)
    p = lattice_sum(lattice, model, Wavevector(k=sol.k))
    scale = gamma - 1.0
    return dict(N=sol.N, k=sol.k, xi=sol.xi, chi=p.chi, shift=p.shift,
                rate_error=abs(p.chi - gamma) / gamma, shift_error=abs(p.shift - delta) / scale)


def suite_roundtrip(seed: int = 0, count: int = 200) -> dict:
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContinuumWarning)
        for t in random_targets(seed, count):
            sol = solve_design(t)
            rate, shift = forward(sol, exact=True)
            scale = t.gamma_target - 1.0
            worst = max(worst, abs(rate - t.gamma_target) / t.gamma_target,
                        abs(shift - t.delta_target) / max(abs(t.delta_target), scale))
            if not math.isfinite(sol.sensitivity):
                worst = math.inf
    closure = design_closure()
    ok_closure = max(closure["rate_error"], closure["shift_error"]) < CLOSURE_TOL
    return dict(suite="roundtrip", passed=worst < ROUNDTRIP_TOL and ok_closure,
                max_rel_error=worst, tolerance=ROUNDTRIP_TOL, closure=closure,
                closure_tolerance=CLOSURE_TOL)


def suite_scaling(cases=None) -> dict:
    cases = SCALING_CASES if cases is None else cases
    rows = []
    for (d, alpha), Ns in cases.items():
        fit = scaling_exponent_check(d, alpha, Ns)
        rows.append(dict(d=d, alpha=alpha, slope=fit.slope, expected=fit.expected,
                         atom_counts=list(fit.atom_counts),
                         passed=abs(fit.slope - fit.expected) < SLOPE_TOL))
    return dict(suite="scaling", passed=all(r["passed"] for r in rows), tolerance=SLOPE_TOL,
                cases=rows)


def run_suite(name: str, seed: int = 0) -> dict:
    if name == "all":
        reports = [run_suite(s, seed) for s in SUITES]
        return dict(suite="all", passed=all(r["passed"] for r in reports), reports=reports)
    if name == "trace":
        return suite_trace(seed)
    if name == "roundtrip":
        return suite_roundtrip(seed)
    table = {"dicke": suite_dicke, "collapse": suite_collapse,
             "closedform": suite_closedform, "scaling": suite_scaling}
    if name not in table:
        raise ValueError(f"unknown suite {name!r}")
    return table[name]()


__all__ = [
    "SUITES", "Collapse", "collapse_curves", "reference_curves", "shift_extrema",
    "resonant_shift", "design_closure", "random_targets", "run_suite", "find_offset_h",
]
