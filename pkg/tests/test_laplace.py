"""Laplace inversion: accelerated real-axis sampling and sinh Bromwich sums."""

from __future__ import annotations

import math
import warnings

import pytest

from levymax.contours import select_params
from levymax.laplace import (
    BromwichScheme,
    GwrScheme,
    _wynn_rho,
    gwr_shift,
    invert_gwr,
    invert_sinh_bromwich,
)
from levymax.models import kobol

M12 = kobol(nu=1.2, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)


def _bromwich_scheme(family: str, tol: float = 1e-13, T: float = 1.0) -> BromwichScheme:
    contour = select_params(M12.profile, "bromwich", tol, family=family, T=T)
    return BromwichScheme(contour)


class TestGwr:
    def test_constant_transform_is_near_exact(self):
        # q -> 1/q inverts to the constant 1 at every horizon, and the
        # near-flat accelerated sequence must short-circuit without noise.
        for T in (0.7, 3.0):
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                value = invert_gwr(GwrScheme(T=T), lambda q: 1.0 / q)
            assert value == pytest.approx(1.0, abs=1e-12)

    def test_exponential_decay(self):
        value = invert_gwr(GwrScheme(T=1.0), lambda q: 1.0 / (q + 1.0))
        assert value == pytest.approx(math.exp(-1.0), abs=1e-7)

    def test_linear_growth(self):
        value = invert_gwr(GwrScheme(T=2.0), lambda q: 1.0 / q**2)
        assert value == pytest.approx(2.0, abs=1e-7)

    def test_oscillatory_inverse(self):
        value = invert_gwr(GwrScheme(T=1.3), lambda q: q / (q * q + 1.0))
        assert value == pytest.approx(math.cos(1.3), abs=5e-4)

    def test_shifted_sampling_unshifts_the_result(self):
        value = invert_gwr(GwrScheme(T=1.0, shift_a=2.0), lambda q: 1.0 / (q + 1.0))
        assert value == pytest.approx(math.exp(-1.0), abs=1e-6)

    def test_scheme_preconditions(self):
        with pytest.raises(ValueError, match="T must be > 0"):
            GwrScheme(T=0.0)
        with pytest.raises(ValueError, match="M must lie in"):
            GwrScheme(T=1.0, M=5)
        with pytest.raises(ValueError, match="M must lie in"):
            GwrScheme(T=1.0, M=11)
        with pytest.raises(ValueError, match="shift_a must be >= 0"):
            GwrScheme(T=1.0, shift_a=-0.5)
        with pytest.warns(UserWarning, match="fragile"):
            GwrScheme(T=1.0, M=7)

    def test_shift_activates_only_for_large_horizons(self):
        assert gwr_shift(M12, 1.0) == 0.0
        assert gwr_shift(M12, 80.0) > 0.0
        # Shifted or not, the smallest sampled q must clear the spectral
        # floor at both half-strip apexes.
        for T in (0.5, 80.0):
            q_min = math.log(2.0) / T + gwr_shift(M12, T)
            for end in M12.profile.strip:
                assert q_min + complex(M12.psi(0.5j * end)).real > 0.0


class TestWynnRho:
    def test_constant_and_near_flat_sequences(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert _wynn_rho([5.0] * 8) == 5.0
            noisy = [1.0 + 3e-10 * (-1.0) ** j * j / 8.0 for j in range(8)]
            assert _wynn_rho(noisy) == noisy[0]

    def test_exact_on_rational_tail_then_stalls(self):
        # s_j = 2 + 1/j is resolved exactly at depth 2; the zero
        # denominators one level deeper must stop the recursion there.
        seq = [2.0 + 1.0 / j for j in range(1, 9)]
        with pytest.warns(UserWarning, match="stalled at depth 3"):
            value = _wynn_rho(seq)
        assert value == pytest.approx(2.0, abs=1e-12)


class TestSinhBromwich:
    @pytest.mark.parametrize("family", ["bromwich-1", "bromwich-2"])
    def test_known_transforms(self, family):
        scheme = _bromwich_scheme(family)
        one = invert_sinh_bromwich(scheme, lambda q: 1.0 / q, T=1.0)
        decay = invert_sinh_bromwich(scheme, lambda q: 1.0 / (q + 1.0), T=1.0)
        assert one == pytest.approx(1.0, abs=1e-13)
        assert decay == pytest.approx(math.exp(-1.0), abs=1e-13)

    def test_contour_families_agree(self):
        values = [
            invert_sinh_bromwich(
                _bromwich_scheme(family), lambda q: 1.0 / (q + 1.0) ** 2, T=1.0
            )
            for family in ("bromwich-1", "bromwich-2")
        ]
        assert abs(values[0] - values[1]) <= 1e-13
        assert values[0] == pytest.approx(math.exp(-1.0), abs=1e-13)

    def test_error_decays_with_tolerance(self):
        errors = []
        for tol in (1e-6, 1e-9, 1e-13):
            scheme = _bromwich_scheme("bromwich-1", tol=tol)
            value = invert_sinh_bromwich(scheme, lambda q: 1.0 / (q + 1.0), T=1.0)
            errors.append(abs(value - math.exp(-1.0)))
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] <= 1e-13

    def test_transform_binding(self):
        contour = select_params(M12.profile, "bromwich", 1e-13, family="bromwich-1", T=1.0)
        bound = BromwichScheme(contour, transform=lambda q: 1.0 / (q + 1.0))
        assert invert_sinh_bromwich(bound, T=1.0) == pytest.approx(
            math.exp(-1.0), abs=1e-13
        )
        # An explicit transform wins over the bound handle.
        assert invert_sinh_bromwich(bound, lambda q: 1.0 / q, T=1.0) == pytest.approx(
            1.0, abs=1e-13
        )

    def test_rejects_bad_inputs(self):
        scheme = _bromwich_scheme("bromwich-1")
        with pytest.raises(ValueError, match="no transform"):
            invert_sinh_bromwich(scheme, T=1.0)
        with pytest.raises(ValueError, match="T must be > 0"):
            invert_sinh_bromwich(scheme, lambda q: 1.0 / q)
        with pytest.raises(ValueError, match="T must be > 0"):
            invert_sinh_bromwich(scheme, lambda q: 1.0 / q, T=-1.0)
        with pytest.raises(TypeError, match="BromwichContour"):
            BromwichScheme(contour="not a contour")

    def test_flags_non_finite_transform_values(self):
        scheme = _bromwich_scheme("bromwich-1")
        calls = {"n": -1}

        def bad(q):
            calls["n"] += 1
            return math.inf if calls["n"] == 3 else 1.0 / q

        with pytest.raises(ValueError, match=r"non-finite transform value .* at node 3"):
            invert_sinh_bromwich(scheme, bad, T=1.0)


def test_real_axis_and_bromwich_inverters_agree():
    transform = lambda q: 1.0 / (q + 1.0) ** 2  # noqa: E731
    by_gwr = invert_gwr(GwrScheme(T=1.0), transform)
    by_bromwich = invert_sinh_bromwich(_bromwich_scheme("bromwich-1"), transform, T=1.0)
    assert abs(by_gwr - by_bromwich) <= 1e-7
