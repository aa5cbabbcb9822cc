import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superrad.analytics import (
    AnalyticContext,
    ContinuumWarning,
    L_d,
    asymptotic_J,
    chi_max,
    chi_max_forms,
    chi_of_xi,
    closed_form_J,
    continuum_I,
    find_offset_h,
    j_closed,
    quadrature_J,
    resonant_J_ss,
    scaling_exponent_check,
    shift_of_xi,
    superradiance_constraint,
)
from superrad.core import LatticeSpec, ValidationError, Wavevector, build_lattice
from superrad.coupling import CouplingModel
from superrad.spectrum import lattice_sum, lattice_sums

H = 2.3311223704144224  # root of x sin x + cos x - 1, frozen from a 30-digit mpmath findroot


def test_constraint():
    assert superradiance_constraint(3, 1.0)
    assert not superradiance_constraint(1, 1.0)
    assert superradiance_constraint(2, 0.99)
    with pytest.raises(ValidationError):
        superradiance_constraint(1, -0.1)


def test_context_derived_fields():
    ctx = AnalyticContext(2, 0.3, 1, 1.0, 3.0, 400)
    assert ctx.beta == 0.5 - 0.3
    assert ctx.Nprime == pytest.approx(20 / math.sqrt(math.pi), rel=1e-15)
    assert ctx.limits == (3.0, 3.0 * ctx.Nprime)
    assert ctx.k_of_xi(ctx.xi(1.01)) == pytest.approx(1.01, rel=1e-15)
    assert AnalyticContext(3, 1.0, 1, -1j, 3.0, 8).theta == math.pi / 2


def test_chi_max_chain():
    for N in (200, 2000, 10**6):
        ctx = AnalyticContext(1, 0.0, 1, 1.0, 3.7, N)
        assert chi_max(ctx) == pytest.approx(1 + N / 2, rel=1e-14)
    assert chi_max(AnalyticContext(1, 0.0, 1, 1.0, 3.0, 2000)) == pytest.approx(1001.0)


def test_chi_max_warns_small_n_and_checks_constraint():
    with pytest.warns(ContinuumWarning):
        chi_max(AnalyticContext(1, 0.0, 1, 1.0, 3.0, 50))
    with pytest.raises(ValidationError):
        chi_max(AnalyticContext(1, 1.2, 1, 1.0, 3.0, 1000))


def test_chi_max_forms_random_draws():
    rng = np.random.default_rng(11)
    for _ in range(50):
        d = int(rng.integers(1, 4))
        alpha = rng.uniform(0, (d + 1) / 2 - 0.01)
        mag = rng.uniform(0.1, 3)
        A = -1j * mag if d == 3 else mag
        ctx = AnalyticContext(d, alpha, 1, A, rng.uniform(1.1, 10), rng.uniform(100, 1e6),
                              rng.uniform(0.1, math.pi - 0.1) if d == 3 else None)
        ref = chi_max(ctx) - 1
        for value in chi_max_forms(ctx).values():
            assert value == pytest.approx(ref, rel=1e-12)


def test_L_d():
    assert L_d(1, 0.0, 1.0) == pytest.approx(0.5, rel=1e-15)
    assert L_d(2, 0.4, 2.0) == pytest.approx(2 * L_d(2, 0.4, 1.0), rel=1e-15)
    assert L_d(3, 1.0, -1j, 0.0) == 0.0


def test_curves_special_points():
    assert chi_of_xi(0.0, 50.0) == 50.0
    assert shift_of_xi(0.0, 50.0) == 0.0
    assert chi_of_xi(math.pi, 50.0) == pytest.approx(1.0, abs=1e-14)
    assert shift_of_xi(1.3, 50.0, -1) == -shift_of_xi(1.3, 50.0, 1)


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50, allow_nan=False))
def test_curves_pythagorean_identity(xi):
    chi_hat = chi_of_xi(xi, 2.0) - 1.0
    shift_hat = shift_of_xi(xi, 2.0)
    assert (xi * chi_hat) ** 2 + (1 + 2 * xi * shift_hat) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_offset_h():
    h = find_offset_h()
    assert 2.3310 <= h <= 2.3312
    assert h == pytest.approx(H, abs=1e-12)
    assert abs(math.tan(h / 2) - h) < 1e-10
    step = 1e-5
    chi = 1e4
    slope = (shift_of_xi(h + step, chi) - shift_of_xi(h - step, chi)) / (2 * step)
    assert abs(slope) < 1e-8 * (chi - 1)


# --- closed forms -------------------------------------------------------------


def test_resonant_jcc_beta0():
    ctx = AnalyticContext(1, 0.0, 1, 1.0, 3.0, 10**6)
    J = closed_form_J("cc", ctx, 1.0).value
    assert J == pytest.approx(1.5 * ctx.Nprime, rel=1e-5)


def test_jcs_jsc_relation_beta0():
    ctx = AnalyticContext(1, 0.0, 1, 1.0, 3.0, 1000)
    A, B = ctx.limits
    for k in (1.001, 1.0001, 0.999):
        cs = closed_form_J("cs", ctx, k).value
        sc = closed_form_J("sc", ctx, k).value
        # only the non-resonant sin((k+1) eta) piece separates them
        exact = (math.cos((1 + k) * A) - math.cos((1 + k) * B)) / (1 + k)
        assert cs + sc == pytest.approx(exact, abs=1e-9)
        assert abs(cs + sc) < 0.02 * abs(sc)


@pytest.mark.parametrize("beta", [-0.5, 0.0, 0.5, 1.0])
@pytest.mark.parametrize("kappa", [0.98, 1.02])
@pytest.mark.parametrize("kind", ["cc", "sc", "cs", "ss"])
def test_closed_against_quadrature(beta, kappa, kind):
    A, B = 3.0, 1500.0
    closed = j_closed(kind, kappa, beta, A, B)
    assert closed == pytest.approx(quadrature_J(kind, kappa, beta, A, B), rel=1e-6)


def test_sinc_forms_match_gamma_forms():
    for kind in ("cc", "sc", "cs", "ss"):
        for kappa in (0.97, 1 - 1e-6, 1.0, 1.03):
            a = j_closed(kind, kappa, 0.0, 3.0, 600.0, method="sinc")
            b = j_closed(kind, kappa, 0.0, 3.0, 600.0, method="gamma")
            assert a == pytest.approx(b, rel=1e-10)


def test_closed_form_flags():
    ctx = AnalyticContext(1, 0.5, 1, 1.0, 3.0, 2000)
    below = closed_form_J("cc", ctx, 0.99)
    assert below.verified and below.oracle_deviation < 1e-6
    above = closed_form_J("cc", ctx, 1.01)
    assert above.verified is None and above.method == "gamma"
    # beta = -1.5 is outside the closed-form range
    out = closed_form_J("cc", AnalyticContext(1, 1.5, 1, 1.0, 3.0, 1000), 1.01)
    assert out.fallback and out.method == "quadrature"
    with pytest.raises(ValidationError):
        closed_form_J("cc", ctx, 1.0, method="sinc")
    with pytest.raises(ValidationError):
        closed_form_J("xy", ctx, 1.0)


def test_asymptotics_converge():
    for Np in (1e3, 1e5):
        ctx = AnalyticContext(1, 0.5, 1, 1.0, 3.0, Np / 0.5)
        for kind in ("cc", "sc"):
            exact = closed_form_J(kind, ctx, 1.02, verify=False).value
            err = abs(asymptotic_J(kind, ctx, 1.02) - exact) / abs(exact)
            assert err < (5e-3 if Np == 1e3 else 5e-5)
        lead = asymptotic_J("cc", ctx, 1.0)
        assert closed_form_J("cc", ctx, 1.0).value == pytest.approx(lead, rel=0.05)
        assert resonant_J_ss(ctx) == pytest.approx(lead, rel=0.05)


def test_resonant_jss_matches_quadrature():
    ctx = AnalyticContext(3, 1.0, 1, -1j, 3.0, 1000)
    A, B = ctx.limits
    assert resonant_J_ss(ctx) == pytest.approx(quadrature_J("ss", 1.0, ctx.beta, A, B), rel=1e-9)


# --- continuum I_d ------------------------------------------------------------------


def test_continuum_resonance_large_n():
    ctx = AnalyticContext(1, 0.0, 1, 1.0, 3.0, 10**6)
    r = continuum_I(ctx, 1.0)
    cm = chi_max(ctx)
    assert r.chi - 1 == pytest.approx(cm - 1, rel=0.01)
    assert abs(r.shift) < 1e-6 * (cm - 1)
    assert r.metadata["amplitude_convention"] == "superradiant"


def test_continuum_quadrature_method_agrees():
    ctx = AnalyticContext(2, 0.5, 1, 1.0, 3.0, 200**2)
    a = continuum_I(ctx, 1.001)
    b = continuum_I(ctx, 1.001, method="quadrature")
    assert a.I == pytest.approx(b.I, rel=1e-8)


def test_continuum_window_warning():
    ctx = AnalyticContext(1, 0.0, 1, 1.0, 3.0, 1000)
    with pytest.warns(ContinuumWarning):
        continuum_I(ctx, 1.0 + 2 * ctx.validity_window)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        continuum_I(ctx, 1.0 + 0.5 * ctx.validity_window)


@pytest.mark.parametrize("d, alpha, m, tol", [(1, 0.0, 2000, 0.01), (2, 0.5, 200, 0.03)])
def test_continuum_matches_lattice(d, alpha, m, tol):
    spec = LatticeSpec(d, 3.0, m)
    model = CouplingModel(1.0, alpha, d=d)
    ctx = AnalyticContext.from_models(spec, model)
    scale = chi_max(ctx) - 1
    xs = np.linspace(-math.pi, math.pi, 25)
    ks = ctx.k_of_xi(xs)
    lat = lattice_sums(build_lattice(spec), model, [Wavevector(float(k)).vector(d) for k in ks])
    cont = np.array([continuum_I(ctx, float(k)).I for k in ks])
    assert np.max(np.abs(lat.real - cont.real)) / scale < tol
    assert np.max(np.abs(lat.imag - cont.imag)) / (2 * scale) < tol


def test_continuum_d3_sign_convention():
    ctx = AnalyticContext(3, 1.0, 1, -1j, 3.0, 20**3)
    r = continuum_I(ctx, 1.0)
    assert r.I.real > 0
    lat = build_lattice(LatticeSpec(3, 3.0, 20))
    p = lattice_sum(lat, CouplingModel(-1j, 1.0, d=3), Wavevector(1.0))
    # small sample: same sign and size, loose agreement only
    assert p.I.real == pytest.approx(r.I.real, rel=0.15)
    mirrored = continuum_I(AnalyticContext(3, 1.0, -1, 1j, 3.0, 20**3), 1.0)
    assert mirrored.I.real == pytest.approx(r.I.real, rel=1e-12)
    assert mirrored.shift == pytest.approx(-r.shift, abs=1e-12)


def test_continuum_nonstandard_amplitude_flagged():
    ctx = AnalyticContext(3, 1.0, 1, 1j, 3.0, 1000)
    assert continuum_I(ctx, 1.0).metadata["amplitude_convention"] == "nonstandard"


# --- scaling ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "d, alpha, Ns, tol",
    [
        (1, 0.0, [500, 2000, 8000], 0.02),
        (1, 0.5, [500, 2000, 8000], 0.03),
        (2, 0.5, [40**2, 80**2, 160**2], 0.05),
    ],
)
def test_scaling_exponent(d, alpha, Ns, tol):
    fit = scaling_exponent_check(d, alpha, Ns)
    assert fit.slope == pytest.approx(fit.expected, abs=tol)


def test_scaling_input_checks():
    with pytest.raises(ValidationError):
        scaling_exponent_check(1, 0.0, [100, 200])
    with pytest.raises(ValidationError):
        scaling_exponent_check(1, 0.0, [100, 200, 400])
    with pytest.raises(ValidationError):
        scaling_exponent_check(1, 1.0, [100, 1000, 10000])
