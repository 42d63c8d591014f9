"""Tests for the characteristic-exponent models."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levymax.models import (
    BrownianModel,
    KoBoLModel,
    RegularityProfile,
    brownian,
    c_infinity,
    calibrate_second_moment,
    kobol,
    psi,
)

# The two benchmark parameter sets used throughout the suite.
TABLE1_MODEL = dict(nu=0.2, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)
TABLE3_MODEL = dict(nu=1.2, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)


def second_derivative_at_zero(model, h=0.005):
    # 5-point central stencil, truncation O(h^4).
    f = lambda x: model.psi(x)
    val = (
        -f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)
    ) / (12 * h * h)
    return val


def test_psi_zero_is_zero():
    for m in (kobol(**TABLE1_MODEL), kobol(**TABLE3_MODEL), brownian(0.09, 0.05)):
        assert m.psi(0.0) == 0.0


def test_calibrated_c_frozen_values():
    m1 = kobol(**TABLE1_MODEL)
    m3 = kobol(**TABLE3_MODEL)
    assert abs(m1.c_plus - 0.08341302597296577) < 1e-16
    assert abs(m3.c_plus - 0.05455822834610504) < 1e-16


def test_second_moment_by_finite_differences():
    for params in (TABLE1_MODEL, TABLE3_MODEL):
        m = kobol(**params)
        d2 = second_derivative_at_zero(m)
        assert abs(d2.real - 0.1) <= 1e-10
        assert abs(d2.imag) <= 1e-12
        assert abs(m.second_moment() - 0.1) < 1e-14


def test_calibration_scales_linearly():
    c1 = calibrate_second_moment(0.1, nu=0.7, lambda_minus=-3.0, lambda_plus=2.0)
    c2 = calibrate_second_moment(0.3, nu=0.7, lambda_minus=-3.0, lambda_plus=2.0)
    assert abs(c2 - 3.0 * c1) < 1e-15


def test_calibration_brownian_passthrough():
    assert calibrate_second_moment(0.04, kind="brownian") == 0.04
    b = brownian(0.04)
    assert abs(second_derivative_at_zero(b).real - 0.04) < 1e-12


def test_calibration_rejects_bad_m2():
    with pytest.raises(ValueError):
        calibrate_second_moment(-0.1, nu=0.5, lambda_minus=-1.0, lambda_plus=1.0)


def test_unsupported_nu_values():
    for nu in (0.0, 1.0, 2.0, -0.3):
        with pytest.raises(ValueError, match="nu"):
            kobol(nu=nu, lambda_minus=-2.0, lambda_plus=1.0, c=0.1)


def test_brownian_exact_quadratic():
    b = brownian(0.09, 0.05)
    for z in (0.3, -1.2 + 0.4j, 2.0j):
        expect = 0.5 * 0.09 * complex(z) ** 2 - 1j * 0.05 * complex(z)
        assert b.psi(z) == expect


def test_hermitian_symmetry():
    m = kobol(**TABLE1_MODEL)
    rng = np.random.default_rng(7)
    for _ in range(25):
        z = complex(rng.normal(0, 3), rng.uniform(-1.9, 0.9))
        assert abs(np.conj(m.psi(z)) - m.psi(-np.conj(z))) < 1e-13 * (1 + abs(m.psi(z)))


def test_cut_errors_name_the_cut():
    m = kobol(**TABLE1_MODEL)
    with pytest.raises(ValueError, match="Im xi >= 1.0"):
        m.psi(1.5j)
    with pytest.raises(ValueError, match="Im xi <= -2.0"):
        m.psi(-2.5j)
    # Strip interior stays evaluable.
    assert np.isfinite(m.psi(0.999j))
    assert np.isfinite(m.psi(-1.999j))


def test_vectorized_psi_matches_scalar():
    m = kobol(**TABLE3_MODEL)
    zs = np.array([0.1 + 0.2j, -3.0 - 1.0j, 5.0 + 0.5j])
    vec = m.psi(zs)
    for z, v in zip(zs, vec):
        assert abs(v - m.psi(complex(z))) < 1e-15


def test_c_infinity_closed_form():
    m = kobol(**TABLE1_MODEL)
    c, nu = m.c_plus, m.nu_plus
    expect = -2.0 * c * math.gamma(-nu) * math.cos(nu * math.pi / 2)
    assert expect > 0.0
    assert abs(c_infinity(m, 0.0) - expect) < 1e-15


def test_c_infinity_ray_limit():
    # psi0(rho)/rho^nu approaches c_inf(0); the constant terms decay like
    # rho^-nu, so the probe radius is order-dependent.
    m3 = kobol(**TABLE3_MODEL)
    ci = c_infinity(m3, 0.0)
    ratio = m3.psi0(1e6) / 1e6**1.2
    assert abs(ratio - ci) / abs(ci) < 1e-3
    m1 = kobol(**TABLE1_MODEL)
    ci = c_infinity(m1, 0.0)
    ratio = m1.psi0(1e20) / 1e20**0.2
    assert abs(ratio - ci) / abs(ci) < 1e-3


def test_c_infinity_modulus_phi_independent():
    m = kobol(**TABLE1_MODEL)
    mods = [abs(c_infinity(m, p)) for p in np.linspace(-1.3, 1.3, 9)]
    assert max(mods) - min(mods) < 1e-14


def test_c_infinity_continuous_on_probe_mesh():
    m = kobol(**TABLE3_MODEL)
    phis = np.linspace(-1.4, 1.4, 57)
    vals = np.array([c_infinity(m, p) for p in phis])
    steps = np.abs(np.diff(vals))
    assert steps.max() < 0.2 * abs(vals[0])


def test_c_infinity_outside_cone_rejected():
    m = kobol(**TABLE1_MODEL)
    with pytest.raises(ValueError, match="cone"):
        c_infinity(m, 2.0)


def test_re_psi_grows_in_positive_cone():
    # Re psi >= c rho^nu - C along rays of the positive cone.
    for params in (TABLE1_MODEL, TABLE3_MODEL):
        m = kobol(**params)
        nu = m.profile.order
        for phi in (-1.2, 0.0, 0.7, 1.2):
            re_ci = c_infinity(m, phi).real
            assert re_ci > 0.0
            for rho in np.geomspace(10.0, 1e6, 6):
                z = rho * np.exp(1j * phi)
                assert m.psi0(z).real >= 0.3 * re_ci * rho**nu - 5.0


def test_mean_rate_frozen():
    assert abs(kobol(**TABLE1_MODEL).mean_rate() - (-0.04133577004840164)) < 1e-15
    assert abs(kobol(**TABLE3_MODEL).mean_rate() - (-0.04722534146881624)) < 1e-15
    # Finite-difference cross-check: E X_1 = i psi'(0).
    m = kobol(**TABLE1_MODEL)
    h = 1e-5
    d1 = (m.psi(h) - m.psi(-h)) / (2 * h)
    assert abs((1j * d1).real - m.mean_rate()) < 1e-9


def test_profile_fields():
    m = kobol(**TABLE1_MODEL)
    assert m.profile.strip == (-2.0, 1.0)
    assert m.profile.is_SL
    assert m.profile.positive_cone_angles == (-math.pi / 2, math.pi / 2)
    assert m.kind == "kobol-symmetric"
    # Above order 1 the positivity cone narrows to +-pi/(2 nu).
    m3 = kobol(**TABLE3_MODEL)
    gp_m, gp_p = m3.profile.positive_cone_angles
    assert abs(gp_p - math.pi / 2.4) < 1e-12 and abs(gp_m + math.pi / 2.4) < 1e-12
    g = KoBoLModel(
        c_plus=0.1, c_minus=0.2, nu_plus=0.5, nu_minus=0.5,
        lambda_minus=-1.0, lambda_plus=2.0,
    )
    assert g.kind == "kobol-general"


def test_profile_validation():
    with pytest.raises(ValueError):
        RegularityProfile(
            order=0.5, strip=(1.0, 2.0), cone_angles=(-1.0, 1.0),
            positive_cone_angles=(-0.5, 0.5), drift=0.0, is_SL=True,
        )
    with pytest.raises(ValueError):
        RegularityProfile(
            order=0.5, strip=(-1.0, 1.0), cone_angles=(-1.0, 1.0),
            positive_cone_angles=(-2.0, 0.5), drift=0.0, is_SL=True,
        )


def test_module_level_psi_delegates():
    m = kobol(**TABLE1_MODEL)
    assert psi(m, 0.3 + 0.1j) == m.psi(0.3 + 0.1j)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=1.95).filter(lambda v: abs(v - 1.0) > 0.05),
    st.floats(min_value=-4.0, max_value=-0.2),
    st.floats(min_value=0.2, max_value=4.0),
    st.floats(min_value=0.01, max_value=1.0),
)
def test_calibration_property(nu, lam_m, lam_p, m2):
    m = kobol(nu=nu, lambda_minus=lam_m, lambda_plus=lam_p, m2=m2)
    assert abs(m.second_moment() - m2) < 1e-12 * max(1.0, m2)
    assert m.c_plus > 0.0
