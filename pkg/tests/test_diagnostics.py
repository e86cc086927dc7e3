import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beurling.diagnostics import (
    COMPARABILITY_LOW,
    DiscGrid,
    comparability_csv,
    comparability_table,
    default_profile_radii,
    delta_lambda,
    delta_lambda_csv,
    exp_series,
    extrapolate_to_boundary,
    growth_check,
    growth_surrogate,
    membership_closed_form_monomial,
    membership_integral,
    min_modulus_bound,
    outer_from_modulus,
    outer_profile,
    u_comparability,
    u_eval,
    u_image_check,
    u_image_margin,
    u_squared,
    u_squared_d4,
    u_squared_series,
    v_power_identity,
)
from beurling.errors import PreconditionError
from beurling.series import Series1D, Series2D, Weight, evaluate, weighted_norm

from oracles import membership_monomial_closed_form, mixed_fourth_derivative, random_nonvanishing

HALF = Weight(0.5, 0.5)


def _angles(n):
    return 2 * np.pi * np.arange(n) / n


# -- outer functions ------------------------------------------------------

def test_outer_of_zero_log_modulus():
    th = _angles(64)
    f = outer_from_modulus(np.stack([th, np.zeros(64)], axis=1), 10)
    assert f[0] == pytest.approx(1.0)
    assert np.max(np.abs(f.coefficients[1:]), initial=0) < 1e-14


def test_outer_recovers_two_minus_z():
    th = _angles(256)
    f = outer_from_modulus((th, np.log(np.abs(2 - np.exp(1j * th)))), 40)
    ref = np.zeros(41, dtype=complex)
    ref[:2] = [2, -1]
    got = np.array([f[k] for k in range(41)])
    assert np.max(np.abs(got - ref)) < 1e-8


def test_outer_recovers_exponential():
    th = _angles(128)
    f = outer_from_modulus((th, np.cos(th)), 20)
    ref = np.array([1 / math.factorial(k) for k in range(21)])
    got = np.array([f[k] for k in range(21)])
    assert np.max(np.abs(got - ref)) < 1e-12


@settings(max_examples=25)
@given(st.integers(0, 2**31 - 1))
def test_outer_round_trip(seed):
    rng = np.random.default_rng(seed)
    n = 128
    th = _angles(n)
    k = np.arange(1, 6)
    a, b = rng.normal(size=5) / k**2, rng.normal(size=5) / k**2
    logm = rng.normal() + np.cos(np.outer(th, k)) @ a + np.sin(np.outer(th, k)) @ b
    f = outer_from_modulus((th, logm), 120)
    assert np.max(np.abs(np.abs(f(np.exp(1j * th))) - np.exp(logm))) <= 1e-8 * np.exp(np.max(logm))


def test_outer_rejects_bad_input():
    th = _angles(16)
    with pytest.raises(ValueError):
        outer_from_modulus((th, np.zeros(16)), 0)
    with pytest.raises(ValueError):
        outer_from_modulus((np.sort(np.random.default_rng(0).uniform(0, 6, 16)), np.zeros(16)), 4)


def test_exp_series_matches_exponential():
    assert np.allclose(exp_series([0, 2], 6), [2**k / math.factorial(k) for k in range(7)])


# -- outer profiles -------------------------------------------------------

def test_profile_of_one():
    prof = outer_profile(Series2D.constant(1.0), 0.3j)
    assert all(v == 0 for v in prof.values) and prof.extrapolated_limit == 0


def test_profile_of_squared_boundary_zero():
    f = Series2D({(0, 0): 1, (1, 0): -2, (2, 0): 1})
    prof = outer_profile(f, 0.5)
    r = np.array(prof.radii)
    assert np.allclose(prof.values, (1 - r) * 2 * np.log(1 - r), atol=1e-12)
    assert abs(prof.extrapolated_limit) < 1e-2
    assert prof.radii == default_profile_radii()


def test_profile_of_singular_inner_type():
    # exp((z + 1)/(z - 1)) truncated; at real r, (1 - r) log|f| = -(1 + r) -> -2
    degree = 2000
    h = np.zeros(degree + 1)
    h[0], h[1:] = -1, -2
    f = Series2D.from_1d(Series1D.from_dense(exp_series(h, degree)))
    radii = [0.5, 0.75, 0.875, 0.9375]
    prof = outer_profile(f, 0.0, radii)
    exact = [-(1 + r) for r in radii]
    assert np.allclose(prof.values[:3], exact[:3], atol=1e-6)
    # |f(15/16)| = e^-31 sits at the round-off floor of the O(1) coefficients
    assert prof.values[-1] == pytest.approx(exact[-1], abs=1e-3)
    assert prof.values[-1] < -1
    assert prof.extrapolated_limit == pytest.approx(-2, abs=1e-2)


def test_profile_product_of_outer_functions(rng):
    th = _angles(128)
    g = outer_from_modulus((th, 0.3 * np.cos(th) + 0.2 * np.sin(2 * th)), 30)
    h = outer_from_modulus((th, np.log(np.abs(1.5 + np.exp(1j * th)))), 30)
    gz = Series2D.from_1d(g, "z")
    hw = Series2D.from_1d(h, "w")
    f = gz * hw
    for w in 0.95 * np.sqrt(rng.uniform(size=5)) * np.exp(2j * np.pi * rng.uniform(size=5)):
        assert abs(outer_profile(f, w).extrapolated_limit) < 1e-2


def test_profile_reports_zero_radius():
    f = Series2D({(0, 0): -0.5, (1, 0): 1})
    with pytest.raises(PreconditionError, match="0.5"):
        outer_profile(f, 0.0)


def test_richardson_is_exact_on_quadratics():
    r = [0.5, 0.75, 0.875]
    assert extrapolate_to_boundary(r, [3 + 2 * (1 - x) - (1 - x) ** 2 for x in r]) == pytest.approx(3)


# -- growth bound ---------------------------------------------------------

def test_min_modulus_constant():
    assert min_modulus_bound(Series2D.constant(0.5)) == pytest.approx(2 * math.log(2))


def test_min_modulus_product_family():
    f = Series2D({(0, 0): 4, (1, 0): -2, (0, 1): -2, (1, 1): 1}) / 9
    M = min_modulus_bound(f, grid_n=64)
    # f(0, w) = 2(2 - w)/9, smallest modulus 2/9 at w = 1
    assert M == pytest.approx(2 * math.log(9 / 2))
    assert growth_check(f, M).violations == 0


def test_min_modulus_boundary_zero_in_z():
    f = Series2D({(0, 0): 0.5, (1, 0): -0.5})
    M = min_modulus_bound(f)
    assert M == pytest.approx(2 * math.log(2))
    r = 1 - np.logspace(-1, -8, 30)
    assert np.all(np.log(1 / np.abs(0.5 * (1 - r))) <= M / (1 - r))


def test_min_modulus_preconditions():
    with pytest.raises(PreconditionError):
        min_modulus_bound(Series2D.constant(2.0))
    with pytest.raises(PreconditionError):
        min_modulus_bound(Series2D({(0, 1): 1.0}))


def test_growth_check_on_random_functions(rng):
    for _ in range(5):
        f = random_nonvanishing(rng)
        chk = growth_check(f, min_modulus_bound(f))
        assert chk.violations == 0 and chk.points == (3 * 64) * (4 * 64)


def test_growth_check_detects_violation():
    # log 100 = 4.6 beats 0.1/(1 - r) at r = 0.5, 0.9 but not at r = 0.99
    chk = growth_check(Series2D.constant(0.01), M=0.1)
    assert chk.violations == chk.points * 2 // 3
    assert chk.worst_margin == pytest.approx(math.log(100) - 0.2)


def test_growth_surrogate_shape():
    rows = growth_surrogate(Series2D({(0, 0): 0.5, (1, 0): -0.5}))
    assert [s for s, _ in rows] == [0.9, 0.99, 0.999]
    assert all(v >= 0 for _, v in rows)


# -- u --------------------------------------------------------------------

def test_u_examples(rng):
    z = np.sqrt(rng.uniform(size=100)) * np.exp(2j * np.pi * rng.uniform(size=100))
    assert np.max(np.abs(u_eval(z, z) - (1 - z) / 4)) < 1e-14
    assert u_eval(1, 0.3 - 0.2j) == 0 and u_eval(0.5j, 1) == 0
    assert u_eval(0, 0) == 0.25
    assert u_eval(1, 1) == 0


def test_u_comparability():
    lo, hi = u_comparability()
    assert lo >= COMPARABILITY_LOW and hi <= 1
    assert lo == pytest.approx(0.25, abs=1e-12)


def test_comparability_ratio_on_diagonal():
    z = np.array([0.3, -0.5j, 0.9 + 0.1j])
    assert np.allclose(np.abs(u_eval(z, z)) / np.abs(1 - z), 0.25)


def test_comparability_table_rows():
    rows = comparability_table(DiscGrid((0.0, 0.9), 16))
    assert len(rows) == 4 and all(COMPARABILITY_LOW <= lo <= hi <= 1 for _, _, lo, hi in rows)
    assert comparability_csv(rows).splitlines()[0] == "r_z,r_w,min_ratio,max_ratio"


def test_u_image():
    assert u_image_check()
    assert (1 / u_eval(0, 0)).real == 4
    u = u_eval(0.99, -0.99)
    assert (u / abs(u) ** 2).real >= 0.5
    x = np.linspace(-1, 0.99, 50)
    d = u_eval(x, x)
    assert np.all(d.real > 0) and np.all(d.real < 0.5 + 1e-15) and np.all(np.abs(1 - d) < 1)
    assert u_image_margin(DiscGrid((0.5, 0.9, 0.99, 1.0), 64)) >= 0.5 - 1e-12


@pytest.mark.parametrize("z,w", [(0.3, -0.2), (0.5j, 0.1 + 0.4j), (-0.7, 0.8), (0.6 + 0.6j, 0.6 - 0.6j)])
def test_fourth_derivative_closed_form(z, w):
    assert u_squared_d4(z, w) == pytest.approx(mixed_fourth_derivative(u_squared, z, w), rel=1e-8)


def test_u_squared_series_basics():
    v = u_squared_series(32)
    assert v[(0, 0)] == pytest.approx(1 / 16, abs=1e-12)
    z = 0.3 - 0.2j
    dense, _, _ = v.to_dense()
    diag = sum(dense[n, m] * z ** (n + m) for n in range(dense.shape[0]) for m in range(dense.shape[1]))
    assert diag == pytest.approx((1 - z) ** 2 / 16, abs=1e-6)
    with pytest.raises(ValueError):
        u_squared_series(48)
    with pytest.raises(ValueError):
        u_squared_series(32, oversample=1)


def test_u_squared_partial_norms_have_convergent_tail():
    norms = [weighted_norm(u_squared_series(n), HALF) for n in (32, 64, 128, 256)]
    inc = np.diff(norms)
    assert np.all(inc > 0)
    ratios = inc[1:] / inc[:-1]
    # tail decays like 1/N: increments halve, so the partial sums converge
    assert np.all((ratios > 0.4) & (ratios < 0.6))


def test_v_power_identity():
    assert v_power_identity(1) <= 1e-10
    # both sides reach |1 - z|^(8N + 2) <= 1.9^18 ~ 1e5 at N = 2
    assert v_power_identity(2, grid_n=32) <= 1e-14 * 1.9**18
    z = np.array([0.2, -0.4j])
    s = np.sqrt(1 - z)
    lhs = u_squared(z, z) ** 2 * (1 - z) ** 2 * (2 * s) ** 8
    assert np.allclose(lhs, (1 - z) ** 10)
    assert u_squared(1.0, 0.3) == 0


# -- membership -----------------------------------------------------------

def test_membership_of_low_degree_polynomial():
    f = Series2D({(0, 0): 1, (1, 0): 2, (1, 1): -1, (0, 1): 3})
    res = membership_integral(f, HALF, 0.5)
    assert res.value == 0 and res.converged


@pytest.mark.parametrize("ab,eps", [((0.5, 0.5), 0.5), ((0.3, 0.6), 0.2), ((0.1, 0.1), 1.0)])
def test_membership_closed_form(ab, eps):
    w = Weight(*ab)
    ref = membership_monomial_closed_form(*ab, eps)
    assert membership_closed_form_monomial(w, eps) == pytest.approx(ref, rel=1e-14)
    res = membership_integral(Series2D.monomial(2, 2), w, eps)
    assert res.value == pytest.approx(ref, rel=1e-6)


def test_membership_of_u_squared_is_stable():
    res = membership_integral(u_squared_d4, HALF, 0.5, radial_nodes=16, angular_nodes=32)
    assert math.isfinite(res.value) and res.value > 0
    assert res.converged and res.verdict == "finite, refinement-stable"


@pytest.mark.parametrize("eps", [0.0, 1.0, 1.5, -0.1])
def test_membership_rejects_eps_at_range_boundary(eps):
    with pytest.raises(ValueError):
        membership_integral(Series2D.monomial(2, 2), HALF, eps)


# -- delta(lambda) --------------------------------------------------------

@pytest.mark.parametrize("lam", [-1, 0.3, 2j, -0.05])
def test_delta_lambda_with_unit_f(lam):
    assert delta_lambda(1.0, u_squared, lam).delta >= 1 - 1e-12


@pytest.mark.parametrize("lam", [-1.0, -0.1, -0.01])
def test_delta_lambda_negative_axis(lam):
    res = delta_lambda(0.0, u_squared, lam)
    assert 0 < res.delta <= abs(lam)
    assert res.lower_bound_ok and res.outside_min >= abs(lam) / 2


def test_delta_lambda_rejects_zero():
    with pytest.raises(ValueError):
        delta_lambda(0.0, u_squared, 0)


def test_delta_lambda_csv():
    rows = [delta_lambda(0.0, u_squared, lam, grid=DiscGrid((0.5, 1.0), 16), refine=False) for lam in (-1, -0.5)]
    text = delta_lambda_csv(rows)
    assert text.splitlines()[0] == "lambda,delta,lower_bound_ok"
    assert len(text.splitlines()) == 3
