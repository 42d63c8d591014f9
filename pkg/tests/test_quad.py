"""Tests for the trapezoid quadrature and summation-by-parts primitives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levymax.quad import (
    ErrorBudget,
    TrapezoidGrid,
    discretization_error,
    hardy_norm_estimate,
    step_for_tolerance,
    sum_by_parts,
    trapezoid_sum,
    truncation_for_tolerance,
)


def test_grid_nodes_and_size():
    g = TrapezoidGrid(zeta=0.5, n_neg=2, n_pos=3, offset=1.0)
    assert g.size == 6
    np.testing.assert_allclose(g.nodes, [0.0, 0.5, 1.0, 1.5, 2.0, 2.5])


def test_grid_validation():
    with pytest.raises(ValueError):
        TrapezoidGrid(zeta=0.0, n_neg=1, n_pos=1)
    with pytest.raises(ValueError):
        TrapezoidGrid(zeta=0.1, n_neg=-1, n_pos=1)


def test_gaussian_integral_exact():
    # Entire integrand, zeta=0.5 leaves the discretization defect ~1e-17.
    grid = TrapezoidGrid.symmetric(0.5, 40)
    val = trapezoid_sum(grid, lambda y: np.exp(-(y**2)) / math.sqrt(math.pi))
    assert abs(val - 1.0) <= 1e-15


def test_zero_integrand():
    grid = TrapezoidGrid.symmetric(0.3, 17)
    assert trapezoid_sum(grid, lambda y: np.zeros_like(y)) == 0.0


def test_lorentzian_defect_is_truncation_dominated():
    # 1/(pi(1+y^2)) integrates to 1; with zeta=0.1 the discretization
    # defect is ~1e-27 (poles at +-i bound the strip) so the whole defect
    # is the analytically bracketed truncated tail.
    zeta, n = 0.1, 10_000
    grid = TrapezoidGrid.symmetric(zeta, n)
    val = trapezoid_sum(grid, lambda y: 1.0 / ((1.0 + y**2) * math.pi)).real
    lam = n * zeta
    tail_hi = 2.0 * (0.5 - math.atan(lam) / math.pi)
    tail_lo = 2.0 * (0.5 - math.atan(lam + zeta) / math.pi)
    disc = discretization_error(zeta, 0.99, 10.0)
    assert tail_lo - disc <= 1.0 - val <= tail_hi + disc
    assert abs((1.0 - val) - 6.365877302654255e-04) < 1e-12


def test_nonfinite_integrand_reports_node():
    grid = TrapezoidGrid.symmetric(1.0, 2)

    def bad(y):
        out = np.ones_like(y, dtype=complex)
        out[y == 1.0] = np.nan
        return out

    with pytest.raises(ValueError, match="node index 1"):
        trapezoid_sum(grid, bad)


def test_scalar_integrand_fallback():
    grid = TrapezoidGrid.symmetric(0.5, 40)
    val = trapezoid_sum(grid, lambda y: math.exp(-float(y) ** 2) / math.sqrt(math.pi))
    assert abs(val - 1.0) <= 1e-15


def test_step_for_tolerance_frozen_value():
    z = step_for_tolerance(ErrorBudget(tol=1e-12, d=math.pi / 4, hardy_norm_est=1.0))
    assert abs(z - 0.1785964470817084) < 1e-15
    # The returned step meets the bound it inverts.
    assert discretization_error(z, math.pi / 4, 1.0) <= 1e-12 * (1 + 1e-12)


def test_step_for_tolerance_monotone_in_tol():
    d = 0.3
    z1 = step_for_tolerance(ErrorBudget(tol=1e-6, d=d))
    z2 = step_for_tolerance(ErrorBudget(tol=5e-7, d=d))
    assert z2 < z1


def test_step_for_tolerance_scales_with_d():
    # The bound depends on d only through d/zeta, so zeta is linear in d.
    z1 = step_for_tolerance(ErrorBudget(tol=1e-10, d=0.2))
    z2 = step_for_tolerance(ErrorBudget(tol=1e-10, d=0.4))
    assert abs(z2 - 2.0 * z1) < 1e-14


def test_budget_validation():
    with pytest.raises(ValueError):
        ErrorBudget(tol=-1e-9, d=0.1)
    with pytest.raises(ValueError):
        ErrorBudget(tol=1e-9, d=0.0)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=1.0),
    st.integers(min_value=5, max_value=60),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
)
def test_trapezoid_sum_linear(zeta, n, c1, c2):
    grid = TrapezoidGrid.symmetric(zeta, n)
    f = lambda y: np.exp(-(y**2)) * (1.0 + 0.5j * y)
    g = lambda y: np.cos(y) / (1.0 + y**2)
    lhs = trapezoid_sum(grid, lambda y: c1 * f(y) + c2 * g(y))
    rhs = c1 * trapezoid_sum(grid, f) + c2 * trapezoid_sum(grid, g)
    assert abs(lhs - rhs) <= 1e-13 * (1.0 + abs(rhs))


def test_trapezoid_sum_reproducible():
    grid = TrapezoidGrid.symmetric(0.07, 300)
    f = lambda y: np.exp(-(y**2) / 3) * np.exp(1j * 2.3 * y)
    assert trapezoid_sum(grid, f) == trapezoid_sum(grid, f)


def test_hardy_norm_estimate_gaussian():
    # For g=e^{-y^2}, H(g,d) = 2 e^{d^2} sqrt(pi) exactly (|g(y+id)| =
    # e^{d^2} e^{-y^2} on both boundaries).
    d = 0.5
    est = hardy_norm_estimate(lambda z: np.exp(-(z**2)), d, y_max=6.0)
    exact = 2.0 * math.exp(d * d) * math.sqrt(math.pi)
    assert 0.9 * exact <= est <= 1.2 * exact


def test_truncation_for_tolerance_doubly_exponential():
    # Envelope e^{-e^{y}}: tail integral from Lambda is ~ e^{-e^Lambda-Lambda}.
    lam = truncation_for_tolerance(lambda y: -math.exp(y), tol=1e-10)
    # True tail = int_X^inf e^-u/u du with X=e^lam, bracketed by
    # (1-1/X) e^-X/X <= tail <= e^-X/X.
    x = math.exp(lam)
    assert math.exp(-x) / x * (1.0 - 1.0 / x) <= 0.5e-10
    # Not absurdly oversized: tolerance still violated a bit below Lambda.
    assert math.exp(-math.exp(lam - 0.5) - (lam - 0.5)) > 0.5e-10


def test_truncation_for_tolerance_rejects_flat_envelope():
    with pytest.raises(ValueError):
        truncation_for_tolerance(lambda y: 0.0, tol=1e-8, y_hi=50.0)


def test_sum_by_parts_zero():
    grid = TrapezoidGrid.symmetric(0.1, 10)
    g = np.zeros(grid.size + 2)
    assert sum_by_parts(grid, a=3.0, g_values=g, n_iters=2) == 0.0


def test_sum_by_parts_constant_telescopes():
    grid = TrapezoidGrid.symmetric(0.1, 50)
    g = np.full(grid.size + 1, 2.7 + 0.3j)
    assert sum_by_parts(grid, a=3.0, g_values=g, n_iters=1) == 0.0


def test_sum_by_parts_matches_long_grid_reference():
    # Reference: the same oscillatory sum taken far past where the
    # Lorentzian has died (Lambda = 50_000), plain trapezoid.
    a, zeta = 5.0, 0.05
    lorentz = lambda y: 1.0 / (1.0 + y**2)
    ref = trapezoid_sum(
        TrapezoidGrid.symmetric(zeta, 1_000_000),
        lambda y: np.exp(-1j * a * y) * lorentz(y),
    )
    grid = TrapezoidGrid.symmetric(zeta, 2000)
    n_it = 3
    y = np.concatenate([grid.nodes, grid.nodes[-1] + zeta * np.arange(1, n_it + 1)])
    val = sum_by_parts(grid, a, lorentz(y), n_iters=n_it)
    assert abs(val - ref) <= 1e-9
    # Independent closed form of the underlying integral.
    assert abs(val - math.pi * math.exp(-a)) <= 1e-9


def test_sum_by_parts_resonant_phase_rejected():
    grid = TrapezoidGrid.symmetric(0.1, 10)
    g = np.ones(grid.size + 1)
    with pytest.raises(ValueError, match="resonant phase"):
        sum_by_parts(grid, a=0.0, g_values=g, n_iters=1)
    with pytest.raises(ValueError, match="resonant phase"):
        sum_by_parts(grid, a=2.0 * math.pi / 0.1, g_values=g, n_iters=1)


def test_sum_by_parts_length_check():
    grid = TrapezoidGrid.symmetric(0.1, 10)
    with pytest.raises(ValueError, match="length"):
        sum_by_parts(grid, a=1.0, g_values=np.ones(grid.size), n_iters=1)
