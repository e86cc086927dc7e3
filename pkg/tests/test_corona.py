import math

import numpy as np
import pytest

from beurling import corona
from beurling.corona import (
    UNIVERSAL_FACTOR,
    CoronaGrid,
    bezout_solve,
    c2_certificate,
    c2_exponent,
    delta_pair,
    mid_stage_error,
)
from beurling.errors import PreconditionError, ToleranceError
from beurling.series import Series2D, Weight, evaluate, multiply, weighted_norm

from conftest import record_corona, solve_case

HALF = Weight(0.5, 0.5)
F1 = Series2D({(1, 0): 0.5, (0, 1): 0.5})
F2 = Series2D({(0, 0): 1, (1, 1): 0.5})


def geometric_inverse(c, degree):
    """1 / (1 - c z) as a truncated series in z."""
    return Series2D({(k, 0): c**k for k in range(degree + 1)})


# -- delta_pair -----------------------------------------------------------

def test_delta_pair_trivial_cases():
    assert delta_pair(Series2D.constant(1.0), Series2D.zero()) == pytest.approx(1.0)
    assert delta_pair(Series2D.monomial(1, 0), Series2D.constant(1.0)) == pytest.approx(1.0)


def test_delta_pair_interior_minimum():
    # |z|^2 + |1 - z/2|^2 is smallest at z = 0.4
    got = delta_pair(Series2D.monomial(1, 0), Series2D({(0, 0): 1, (1, 0): -0.5}))
    assert got == pytest.approx(math.sqrt(0.8), abs=1e-7)


def test_delta_pair_refinement_stable():
    vals = [delta_pair(F1, F2, grid_n=n) for n in (64, 128, 256)]
    assert max(vals) - min(vals) < 1e-3
    assert vals[0] > 0
    # brute-force oracle on a dense grid of the closed bidisc
    t = np.exp(2j * np.pi * np.arange(96) / 96)
    pts = (np.linspace(0, 1, 41)[:, None] * t[None, :]).reshape(-1)
    F = np.abs(evaluate(F1, pts[:, None], pts[None, :])) ** 2 + np.abs(evaluate(F2, pts[:, None], pts[None, :])) ** 2
    assert vals[-1] <= math.sqrt(F.min()) + 1e-12


# -- certificates ---------------------------------------------------------

@pytest.mark.parametrize("ab,exponent", [((0.5, 0.5), 42), ((1, 1), 36)])
def test_c2_exponent(ab, exponent):
    assert c2_exponent(Weight(*ab)) == exponent
    cert = c2_certificate(0.5, Weight(*ab))
    assert cert.exponent == exponent and cert.universal_factor == UNIVERSAL_FACTOR == 33


def test_c2_certificate_at_delta_one():
    cert = c2_certificate(1.0, HALF, measured_norm=3.0)
    assert cert.bound() == 1.0
    assert cert.fitted_constant == 3.0


@pytest.mark.parametrize("delta", [0.0, 1.5, -1])
def test_c2_certificate_domain(delta):
    with pytest.raises(ValueError):
        c2_certificate(delta, HALF)


# -- solver ---------------------------------------------------------------

def test_trivial_pair_is_exact():
    f1, f2, _, sol, inter, _ = solve_case("trivial")
    assert sol.h1 == Series2D.constant(1.0)
    assert len(sol.h2) == 0
    assert sol.residual_norm == 0.0 and sol.anti_analytic_leak == 0.0
    assert np.all(inter.a.values == 0) and np.all(inter.b.values == 0)


def test_two_variable_example():
    f1, f2, delta, sol, inter, _ = solve_case("two-variable")
    assert sol.residual_norm <= 1e-5
    assert sol.anti_analytic_leak <= 1e-5
    assert weighted_norm(multiply(f1, sol.h1) + multiply(f2, sol.h2) - 1.0, HALF) == pytest.approx(
        sol.residual_norm, rel=1e-9, abs=1e-15)
    hn = math.sqrt(weighted_norm(sol.h1, HALF) ** 2 + weighted_norm(sol.h2, HALF) ** 2)
    assert math.isfinite(hn)
    # the certificate describes the normalised pair (f1, f2) / s
    s = inter.summary["normalisation"]
    assert sol.certificate.delta == pytest.approx(delta / s)
    assert sol.certificate.measured_norm == pytest.approx(hn * s)
    assert sol.certificate.exponent == 42


def test_stage_z_analyticity():
    *_, inter, _ = solve_case("two-variable")
    assert inter.summary["stage_z_negative_mass"] < 1e-8


def test_intermediates_invariants():
    f1, f2, delta, sol, inter, _ = solve_case("two-variable")
    s = inter.summary["normalisation"]
    assert np.min(inter.F.values.real) >= (delta / s) ** 2 * (1 - 1e-12)
    assert mid_stage_error(f1, f2, inter) <= 1e-8
    assert inter.c is not None and inter.d is not None
    assert not inter.summary["dbar_failures"]


def test_one_variable_koszul_oracle():
    f1, f2, _, sol, inter, _ = solve_case("one-variable")
    assert sol.residual_norm <= 1e-6
    assert inter.summary["stage_w_skipped"]
    # (1/2, 1) solves z h1 + (1 - z/2) h2 = 1; every other solution differs
    # from it by k (f2, -f1) with k = (h1 - 1/2) / f2
    k = multiply(sol.h1 - 0.5, geometric_inverse(0.5, 200))
    check = sol.h2 - 1.0 + multiply(f1, k)
    deg = sol.h1.degree()[0]
    worst = max((abs(check[(n, 0)]) for n in range(deg + 1)), default=0.0)
    assert worst <= 1e-8


def test_swap_invariance():
    f1, f2, delta, sol, _, _ = solve_case("one-variable")
    sol2, inter2 = record_corona("one-variable-swapped", f2, f1, *bezout_solve(f2, f1, delta, HALF))
    assert sol2.h1.allclose(sol.h2, atol=1e-10)
    assert sol2.h2.allclose(sol.h1, atol=1e-10)


def test_precondition_small_delta_on_grid():
    with pytest.raises(PreconditionError):
        bezout_solve(Series2D.monomial(1, 0), Series2D({(0, 0): 1, (1, 0): -0.5}), 0.95, HALF,
                     grid=CoronaGrid(16, 64))


def test_rejects_common_zero_pair():
    with pytest.raises(PreconditionError):
        bezout_solve(Series2D.zero(), Series2D.zero(), 0.5, HALF)


def test_tolerance_failure_reports_diagnostics(monkeypatch):
    monkeypatch.setattr(corona, "MAX_ANGULAR", 64)
    with pytest.raises(ToleranceError) as info:
        bezout_solve(F1, F2, 0.5, HALF, grid=CoronaGrid(16, 64), tol=1e-30)
    assert "residual" in str(info.value)
    assert info.value.partial.summary["grid"]["angular_n"] == 64


@pytest.mark.slow
def test_bound_scaling_family():
    rows = []
    for t in (1.5, 1.0, 0.8, 0.65):
        f2 = Series2D({(0, 0): t, (1, 1): 0.5})
        delta = delta_pair(F1, f2)
        sol, inter = record_corona(f"scaling t={t}", F1, f2,
                                   *bezout_solve(F1, f2, delta, HALF, grid=CoronaGrid(32, 64),
                                                 keep_intermediates=False))
        assert sol.residual_norm <= 1e-5
        hn = math.sqrt(weighted_norm(sol.h1, HALF) ** 2 + weighted_norm(sol.h2, HALF) ** 2)
        rows.append((delta, hn, hn * delta ** c2_exponent(HALF)))
    deltas = [r[0] for r in rows]
    assert deltas == sorted(deltas, reverse=True)
    products = [r[2] for r in rows]
    assert max(products) <= products[0] * (1 + 1e-9)
