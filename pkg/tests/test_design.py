import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superrad.analytics import AnalyticContext, ContinuumWarning, chi_max, find_offset_h
from superrad.core import InfeasibleError, LatticeSpec, ValidationError, Wavevector, build_lattice
from superrad.coupling import CouplingModel
from superrad.design import (
    DesignTarget,
    dicke_compatible,
    forward,
    nearest_lattice_count,
    ratio_to_xi,
    similar_alpha,
    solve_design,
    transform_chi,
)
from superrad.spectrum import lattice_sum


def test_zero_shift_target():
    sol = solve_design(DesignTarget(100.0, 0.0, d=1, alpha=0.0, A=1.0, k0a=3.0))
    assert sol.xi == 0.0 and sol.chi_max == 100.0
    assert (sol.N, sol.m) == (198, 198)
    assert sol.residual_rate == 0.0 and sol.residual_shift == 0.0
    assert sol.k == 1.0


def test_extremum_target():
    h = find_offset_h()
    sol = solve_design(DesignTarget(51.0, -25.0 * math.tan(h / 2)))
    assert sol.xi == pytest.approx(h, abs=1e-12)
    rate, shift = forward(sol, exact=True)
    assert abs(rate - 51.0) < 1e-10 and abs(shift + 25.0 * math.tan(h / 2)) < 1e-10


def test_epsilon_flip_negates_xi():
    a = solve_design(DesignTarget(400.0, 70.0, epsilon=1))
    b = solve_design(DesignTarget(400.0, 70.0, epsilon=-1))
    assert b.xi == -a.xi


def test_target_validation():
    with pytest.raises(ValidationError):
        DesignTarget(0.5)
    with pytest.raises(ValidationError):
        DesignTarget(10.0, free="d")
    with pytest.raises(ValidationError):
        DesignTarget(10.0, free="k0a")
    with pytest.raises(ValidationError):
        solve_design(DesignTarget(10.0, alpha=1.0, d=1))
    with pytest.raises(InfeasibleError):
        solve_design(DesignTarget(1.0, 0.5))
    with pytest.raises(InfeasibleError):
        ratio_to_xi(1.0, 0.0)


def test_small_n_warns():
    with pytest.warns(ContinuumWarning):
        sol = solve_design(DesignTarget(10.0, 0.0))
    assert sol.N < 100 and sol.warnings


def test_free_parameters():
    base = dict(gamma_target=100.0, delta_target=5.0, d=2, alpha=0.5, N=10000)
    for free in ("k0a", "A", "alpha"):
        sol = solve_design(DesignTarget(free=free, **base))
        assert abs(sol.residual_rate) < 1e-9 * 100 and abs(sol.residual_shift) < 1e-9 * 100
        assert sol.N == 10000 and sol.m == 100
    with pytest.raises(InfeasibleError):
        solve_design(DesignTarget(100.0, d=1, alpha=0.0, N=1000, free="k0a"))
    with pytest.raises(InfeasibleError):
        solve_design(DesignTarget(1e6, d=2, alpha=0.5, N=100, free="alpha"))


def test_d3_design():
    sol = solve_design(DesignTarget(300.0, -40.0, d=3, alpha=1.0, A=1.0, k0a=2.0))
    assert sol.A_d == -1j
    assert round(sol.N ** (1 / 3)) ** 3 == sol.N and sol.m % 2 == 0


def test_nearest_lattice_count():
    assert nearest_lattice_count(198.0, 1) == (198, 198)
    assert nearest_lattice_count(199.2, 1) == (200, 200)
    assert nearest_lattice_count(0.3, 2) == (4, 2)
    assert nearest_lattice_count(1000.0, 3) == (1000, 10)


@settings(max_examples=100, deadline=None)
@given(
    gamma=st.floats(1.001, 1000.0),
    rho=st.floats(-4.99, 4.99),
    d=st.integers(1, 3),
    frac=st.floats(0.0, 0.95),
    eps=st.sampled_from([1, -1]),
)
def test_roundtrip_property(gamma, rho, d, frac, eps):
    alpha = frac * (d + 1) / 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContinuumWarning)
        sol = solve_design(DesignTarget(gamma, rho * (gamma - 1), d=d, alpha=alpha, epsilon=eps))
    rate, shift = forward(sol, exact=True)
    assert rate == pytest.approx(gamma, rel=1e-9)
    assert abs(shift - rho * (gamma - 1)) <= 1e-9 * max(gamma, abs(rho * (gamma - 1)))
    # rounding residual is controlled by the reported sensitivity
    assert math.isfinite(sol.sensitivity) and sol.sensitivity > 0
    # first order in the rounding step; chi is concave in N, the factor 2
    # covers evaluating the slope at the rounded rather than the exact N
    if sol.N >= 100:
        dN = abs(sol.N - sol.exact_value)
        assert abs(sol.residual_rate) <= 2 * sol.sensitivity * dN + 1e-9 * gamma


def test_designed_chain_against_lattice_sum():
    for gamma, delta in [(500.0, -200.0), (800.0, 100.0)]:
        sol = solve_design(DesignTarget(gamma, delta, d=1, alpha=0.0))
        assert sol.N <= 4000
        lat = build_lattice(LatticeSpec(1, sol.k0a, sol.m))
        p = lattice_sum(lat, CouplingModel(sol.A, sol.alpha, sol.epsilon), Wavevector(sol.k))
        assert p.chi == pytest.approx(gamma, rel=0.10)
        assert abs(p.shift - delta) < 0.10 * (gamma - 1)


# --- transformations --------------------------------------------------------------


def test_transform_examples():
    assert transform_chi(7.0, 3.0, 1.0, 2, 0.4) == 21.0
    assert transform_chi(7.0, 3.0, 5.0, 1, 0.0) == 21.0
    assert transform_chi(8.0, 1.0, 8.0, 3, 1.0) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(ValidationError):
        transform_chi(1.0, -1.0, 1.0, 1, 0.0)


def test_transform_matches_chi_max_scaling():
    # chi_max - 1 moves by exactly the transform factor when N, V rescale
    d, alpha = 2, 0.3
    ctx = AnalyticContext(d, alpha, 1, 1.0, 3.0, 10**4)
    f_N, f_V = 4.0, 2.0
    # V = N a^d, so a -> (f_V/f_N)^(1/d) a
    k0a = 3.0 * (f_V / f_N) ** (1 / d)
    new = AnalyticContext(d, alpha, 1, 1.0, k0a, f_N * 10**4)
    assert chi_max(new) - 1 == pytest.approx(transform_chi(chi_max(ctx) - 1, f_N, f_V, d, alpha),
                                             rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    f=st.lists(st.floats(0.1, 10.0), min_size=4, max_size=4),
    d=st.integers(1, 3),
    alpha=st.floats(0.0, 1.9),
)
def test_transform_composes(f, d, alpha):
    a, b, c, e = f
    two = transform_chi(transform_chi(3.0, a, b, d, alpha), c, e, d, alpha)
    one = transform_chi(3.0, a * c, b * e, d, alpha)
    assert two == pytest.approx(one, rel=1e-12)


def test_similar_alpha_examples():
    assert similar_alpha(3, 1.0, 1).alpha_prime == 2 / 3
    assert similar_alpha(3, 1.0, 1).feasible
    s = similar_alpha(2, 0.7, 2)
    assert s.alpha_prime == 0.7 and s.feasible
    bad = similar_alpha(1, 0.0, 3)
    assert bad.alpha_prime == -1.0 and not bad.feasible


@settings(max_examples=100, deadline=None)
@given(d=st.integers(1, 3), dp=st.integers(1, 3), alpha=st.floats(0.0, 2.0))
def test_similar_alpha_involution(d, dp, alpha):
    fwd = similar_alpha(d, alpha, dp)
    if fwd.feasible:
        back = similar_alpha(dp, fwd.alpha_prime, d)
        assert back.alpha_prime == pytest.approx(alpha, abs=1e-12)


def test_dicke_compatible():
    assert dicke_compatible(1, 0.0)
    assert not any(dicke_compatible(2, a) for a in (0.0, 0.5, 1.0))
    assert not dicke_compatible(1, 0.1)
    assert not dicke_compatible(3, 1.0)
