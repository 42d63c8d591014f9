"""Contour geometry, parameter recipes, and admissibility scans."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levymax.contours import (
    BromwichContour,
    DeformationError,
    SinhContour,
    select_params,
    validate_deformation,
    vertical_gap,
)
from levymax.models import LevyModel, RegularityProfile, kobol
from levymax.quad import ErrorBudget, TrapezoidGrid, step_for_tolerance

M02 = kobol(nu=0.2, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)
M12 = kobol(nu=1.2, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)


def test_sinh_point_and_apex():
    c = SinhContour(
        omega1=-0.2, b=0.7, omega=0.6,
        grid=TrapezoidGrid(zeta=0.25, n_neg=8, n_pos=8), strip_halfwidth=0.6,
    )
    assert abs(c.apex - (-0.2 + 0.7 * math.sin(0.6))) < 1e-15
    z0 = c.point(0.0)
    assert abs(z0 - 1j * c.apex) < 1e-15
    # finite-difference check of the stored derivative
    h = 1e-6
    fd = (c.point(0.3 + h) - c.point(0.3 - h)) / (2 * h)
    assert abs(fd - c.derivative(0.3)) < 1e-8
    assert np.allclose(c.nodes, c.point(c.grid.nodes))
    assert np.allclose(c.derivs, c.derivative(c.grid.nodes))


def test_sinh_rejects_bad_geometry():
    g = TrapezoidGrid(zeta=0.1, n_neg=4, n_pos=4)
    with pytest.raises(ValueError, match="b must be"):
        SinhContour(omega1=0.0, b=0.0, omega=0.1, grid=g, strip_halfwidth=0.1)
    with pytest.raises(ValueError, match="omega"):
        SinhContour(omega1=0.0, b=1.0, omega=1.6, grid=g, strip_halfwidth=0.1)
    with pytest.raises(ValueError, match="centred"):
        SinhContour(
            omega1=0.0, b=1.0, omega=0.1,
            grid=TrapezoidGrid(zeta=0.1, n_neg=4, n_pos=4, offset=1.0),
            strip_halfwidth=0.1,
        )


def test_bromwich_geometry_and_symmetry():
    c = BromwichContour(
        sigma_l=3.0, b_l=10.0, omega_l=0.15,
        grid=TrapezoidGrid(zeta=0.05, n_neg=0, n_pos=40), strip_halfwidth=0.15,
    )
    assert abs(c.anchor - (3.0 - 10.0 * math.sin(0.15))) < 1e-14
    assert c.nodes[0].imag == pytest.approx(0.0, abs=1e-14)
    assert c.nodes[0].real == pytest.approx(c.anchor)
    # conjugate symmetry supplies the y<0 half
    ys = np.array([0.3, 1.1])
    assert np.allclose(c.point(-ys), np.conj(c.point(ys)))
    h = 1e-6
    fd = (c.point(0.4 + h) - c.point(0.4 - h)) / (2 * h)
    assert abs(fd - c.derivative(0.4)) < 1e-7
    # Re q decreases along the contour
    re = c.nodes.real
    assert np.all(np.diff(re) < 0.0)


def test_bromwich_rejects_left_half_plane():
    with pytest.raises(ValueError, match="right half-plane"):
        BromwichContour(
            sigma_l=1.0, b_l=10.0, omega_l=0.15,
            grid=TrapezoidGrid(zeta=0.05, n_neg=0, n_pos=10), strip_halfwidth=0.15,
        )
    with pytest.raises(ValueError, match="y >= 0"):
        BromwichContour(
            sigma_l=3.0, b_l=10.0, omega_l=0.15,
            grid=TrapezoidGrid(zeta=0.05, n_neg=10, n_pos=10), strip_halfwidth=0.15,
        )


def test_gwr_wing_angles():
    # half the positivity cone: pi/4 below order 1, pi/4/nu above
    c = select_params(M02.profile, "xi_plus", 1e-12)
    assert c.omega == pytest.approx(math.pi / 4, abs=1e-14)
    assert c.strip_halfwidth == pytest.approx(math.pi / 4, abs=1e-14)
    c = select_params(M12.profile, "xi_plus", 1e-12)
    assert c.omega == pytest.approx((math.pi / 4) / 1.2, abs=1e-14)
    c = select_params(M12.profile, "eta_minus", 1e-12)
    assert c.omega == pytest.approx(-(math.pi / 4) / 1.2, abs=1e-14)


def test_family_preset_angles():
    c = select_params(M12.profile, "xi_plus", 1e-12, family="bromwich-1")
    assert c.omega == pytest.approx((math.pi / 2) / 4.5 / 1.2, abs=1e-14)
    c = select_params(M12.profile, "xi_plus", 1e-12, family="bromwich-2")
    assert c.omega == pytest.approx((math.pi / 2) / 5.0 / 1.2, abs=1e-14)
    bw = select_params(M12.profile, "bromwich", 1e-12, family="bromwich-1", T=0.25)
    assert bw.omega_l == pytest.approx((math.pi / 2) / 9.0, abs=1e-14)
    bw = select_params(M12.profile, "bromwich", 1e-12, family="bromwich-2", T=0.25)
    assert bw.omega_l == pytest.approx((math.pi / 2) / 10.0, abs=1e-14)
    with pytest.raises(DeformationError, match="keeps q real"):
        select_params(M12.profile, "bromwich", 1e-12, family="gwr", T=0.25)
    with pytest.raises(ValueError, match="unknown family"):
        select_params(M12.profile, "xi_plus", 1e-12, family="talbot")


def test_apex_defaults_and_windows():
    cp = select_params(M02.profile, "xi_plus", 1e-10)
    cm = select_params(M02.profile, "eta_minus", 1e-10)
    assert cp.apex == pytest.approx(0.5)
    assert cm.apex == pytest.approx(-1.0)
    assert vertical_gap(cp, cm) == pytest.approx(1.5)
    below = select_params(M02.profile, "one_dim", 1e-10, x_sign=1)
    assert below.omega > 0.0 and below.apex == pytest.approx(-1.0)
    above = select_params(M02.profile, "one_dim", 1e-10, x_sign=-1)
    assert above.omega < 0.0 and above.apex == pytest.approx(0.5)
    flat = select_params(M02.profile, "one_dim", 1e-10, x_sign=0)
    assert flat.omega == 0.0 and flat.apex == pytest.approx(0.5)
    # flat strip: 0.9 * arcsin of the tighter window wall at b=1
    assert flat.strip_halfwidth == pytest.approx(0.9 * math.asin(0.5), abs=1e-12)


def test_step_matches_budget():
    tol = 1e-12
    c = select_params(M02.profile, "xi_plus", tol)
    want = step_for_tolerance(ErrorBudget(tol=tol, d=c.strip_halfwidth, hardy_norm_est=1.0))
    assert c.grid.zeta == pytest.approx(want, rel=1e-12)


def test_phase_gap_shrinks_grid():
    slow = select_params(M02.profile, "xi_plus", 1e-10, phase_gap=0.0, decay_rate=0.2)
    fast = select_params(M02.profile, "xi_plus", 1e-10, phase_gap=0.05, decay_rate=0.2)
    assert fast.grid.n_pos < slow.grid.n_pos / 4


def test_grid_overrides():
    c = select_params(M02.profile, "xi_plus", 1e-10, zeta=0.125, n_nodes=77)
    assert c.grid.zeta == 0.125 and c.grid.n_pos == 77 and c.grid.n_neg == 77


def test_bromwich_anchor_rule():
    bw = select_params(M12.profile, "bromwich", 1e-12, family="bromwich-1", T=0.25)
    assert bw.anchor == pytest.approx(4.0, rel=1e-12)  # 1/T dominates
    w = bw.omega_l
    cap = 0.9 * 4.0 / (math.sin(2 * w) - math.sin(w))
    assert bw.b_l <= cap * (1 + 1e-12)
    long_t = select_params(M12.profile, "bromwich", 1e-12, family="bromwich-2", T=15.0)
    assert long_t.anchor == pytest.approx(0.1, rel=1e-12)  # floor dominates
    floored = select_params(
        M12.profile, "bromwich", 1e-12, family="bromwich-2", T=15.0, sigma_floor=0.3
    )
    assert floored.anchor == pytest.approx(0.3, rel=1e-12)


def test_bromwich_refused_for_finite_variation_drift():
    fv = kobol(nu=0.5, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1, mu=0.1)
    with pytest.raises(DeformationError, match="finite-variation"):
        select_params(fv.profile, "bromwich", 1e-12, family="bromwich-2", T=1.0)
    # driftless finite-variation keeps the deformed Laplace contour
    ok = kobol(nu=0.5, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)
    select_params(ok.profile, "bromwich", 1e-12, family="bromwich-2", T=1.0)


def test_validate_sl_fast_path():
    flat = select_params(M02.profile, "one_dim", 1e-10, x_sign=0, zeta=0.1, n_nodes=50)
    psi_apex = complex(M02.psi(1j * flat.apex)).real
    good = validate_deformation(M02, flat, [0.05, 1.0, 10.0])
    assert good.ok and good.n_checked == 3
    assert good.min_margin == pytest.approx(0.05 + psi_apex, rel=1e-12)
    bad = validate_deformation(M02, flat, [0.01])
    assert not bad.ok and len(bad.violations) == 1
    with pytest.raises(DeformationError, match="shrink"):
        bad.raise_if_failed()


def test_validate_full_scan_family_preset():
    # coupled preset: complex q from the Laplace contour against both wings
    bw = select_params(M12.profile, "bromwich", 1e-12, family="bromwich-1", T=0.25)
    for role in ("xi_plus", "eta_minus"):
        c = select_params(M12.profile, role, 1e-12, family="bromwich-1", phase_gap=0.025)
        rep = validate_deformation(M12, c, bw.nodes)
        assert rep.ok, rep.violations[:2]
        assert rep.min_margin > 0.1
        assert rep.n_checked == bw.nodes.size * c.nodes.size


class _ZeroModel(LevyModel):
    kind = "zero"
    profile = RegularityProfile(
        order=1.0, strip=(-1.0, 1.0), cone_angles=(-math.pi / 2, math.pi / 2),
        positive_cone_angles=(-math.pi / 2, math.pi / 2), drift=0.0, is_SL=False,
    )

    def psi0(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=complex))


def test_validate_trivial_exponent_passes():
    c = select_params(_ZeroModel().profile, "one_dim", 1e-10, x_sign=0, zeta=0.2, n_nodes=20)
    rep = validate_deformation(_ZeroModel(), c, [0.5, 2.0])
    assert rep.ok and rep.min_margin == pytest.approx(1.0)


def test_validate_flags_cut_crossing():
    # negative real q pushes 1 + psi/q onto the cut for far nodes, where
    # arg psi -> 0 along the flat contour
    flat = select_params(M02.profile, "one_dim", 1e-10, x_sign=0, zeta=0.1, n_nodes=200)
    rep = validate_deformation(M02, flat, np.array([-0.5 + 0j]))
    assert not rep.ok
    assert rep.min_margin < 1e-8
    with pytest.raises(DeformationError):
        rep.raise_if_failed()


def test_validate_rejects_wrong_contour_type():
    bw = select_params(M12.profile, "bromwich", 1e-10, family="bromwich-2", T=1.0)
    with pytest.raises(TypeError):
        validate_deformation(M12, bw, [1.0])
    flat = select_params(M02.profile, "one_dim", 1e-10, x_sign=0, zeta=0.2, n_nodes=10)
    with pytest.raises(ValueError, match="nonempty"):
        validate_deformation(M02, flat, [])


def test_vertical_gap_requires_opposed_wings():
    cp = select_params(M02.profile, "xi_plus", 1e-10)
    cm = select_params(M02.profile, "eta_minus", 1e-10)
    with pytest.raises(ValueError):
        vertical_gap(cm, cp)
    with pytest.raises(ValueError):
        vertical_gap(cp, cp)


def test_degenerate_cone_unsupported():
    prof = RegularityProfile(
        order=1.0, strip=(-1.0, 1.0), cone_angles=(-math.pi / 2, math.pi / 2),
        positive_cone_angles=(-0.01, 0.01), drift=0.0, is_SL=False,
    )
    with pytest.raises(DeformationError, match="cone"):
        select_params(prof, "xi_plus", 1e-10)


def test_unknown_role():
    with pytest.raises(ValueError, match="unknown role"):
        select_params(M02.profile, "diagonal", 1e-10)


@settings(max_examples=40, deadline=None)
@given(
    omega=st.floats(min_value=0.05, max_value=1.3),
    apex=st.floats(min_value=0.08, max_value=0.92),
)
def test_rotated_apex_stays_in_window(omega, apex):
    # the whole error strip |s| <= d must keep the axis crossing inside (0, mu+)
    c = select_params(M02.profile, "xi_plus", 1e-8, omega=omega, apex=apex)
    d = c.strip_halfwidth
    for s in np.linspace(-d, d, 21):
        crossing = c.omega1 + c.b * math.sin(c.omega + s)
        assert 0.0 < crossing < 1.0
