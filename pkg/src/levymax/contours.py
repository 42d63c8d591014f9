"""Sinh-deformed integration contours: geometry, parameter recipes, admissibility."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .models import LevyModel, RegularityProfile
from .quad import ErrorBudget, TrapezoidGrid, step_for_tolerance, truncation_for_tolerance

__all__ = [
    "SinhContour",
    "BromwichContour",
    "DeformationError",
    "DeformationReport",
    "select_params",
    "validate_deformation",
    "vertical_gap",
]

# Families of coupled deformations for the Laplace/xi contours. "gwr" keeps q
# real so the xi wings may open to half the positivity cone; the two bromwich
# presets shrink everything so that arg q and the wing rotation stay jointly
# admissible. Ratios multiply the positivity-cone half-angle.
_FAMILIES = {
    "gwr": {"omega_ell": None, "wing_ratio": 0.5},
    "bromwich-1": {"omega_ell": (math.pi / 2) / 9.0, "wing_ratio": 1.0 / 4.5},
    "bromwich-2": {"omega_ell": (math.pi / 2) / 10.0, "wing_ratio": 1.0 / 5.0},
}

_DEGENERATE_CONE = 0.02
_APEX_SAFETY = 0.85  # fraction of the available scale b may consume
_OVERSIZE = 1.2  # truncation margin; grids a bit longer than necessary


class DeformationError(RuntimeError):
    """A deformation failed admissibility; callers map this to a numerical-failure exit."""


@dataclass(frozen=True)
class SinhContour:
    """Curve chi(y) = i omega1 + b sinh(i omega + y) on a symmetric trapezoid grid.

    omega > 0 bends both wings upward, omega < 0 downward, omega = 0 keeps the
    flat line Im chi = omega1. The apex chi(0) = i (omega1 + b sin omega) is
    the only point of the curve on the imaginary axis, so cut crossings are
    controlled by the apex alone.

    strip_halfwidth is the half-width d of the strip around the real y-axis
    used in the discretization error bound for integrands on this contour.
    """

    omega1: float
    b: float
    omega: float
    grid: TrapezoidGrid
    strip_halfwidth: float

    def __post_init__(self) -> None:
        if not self.b > 0.0:
            raise ValueError(f"b must be > 0, got {self.b}")
        if not abs(self.omega) < math.pi / 2:
            raise ValueError(f"|omega| must be < pi/2, got {self.omega}")
        if not self.strip_halfwidth > 0.0:
            raise ValueError(f"strip_halfwidth must be > 0, got {self.strip_halfwidth}")
        if self.grid.offset != 0.0:
            raise ValueError("sinh contours use grids centred at y=0")

    @property
    def apex(self) -> float:
        """Im chi(0), the height of the imaginary-axis crossing."""
        return self.omega1 + self.b * math.sin(self.omega)

    def point(self, y):
        y = np.asarray(y, dtype=float)
        return 1j * self.omega1 + self.b * np.sinh(1j * self.omega + y)

    def derivative(self, y):
        """d chi / d y."""
        y = np.asarray(y, dtype=float)
        return self.b * np.cosh(1j * self.omega + y)

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.point(self.grid.nodes)

    @cached_property
    def derivs(self) -> np.ndarray:
        return self.derivative(self.grid.nodes)


@dataclass(frozen=True)
class BromwichContour:
    """Laplace contour q(y) = sigma_l + i b_l sinh(i omega_l + y), y >= 0 only.

    Conjugate symmetry q(-y) = conj(q(y)) lets the inverter fold the negative
    half of the grid; the stored grid therefore starts at y=0.
    """

    sigma_l: float
    b_l: float
    omega_l: float
    grid: TrapezoidGrid
    strip_halfwidth: float

    def __post_init__(self) -> None:
        if not self.b_l > 0.0:
            raise ValueError(f"b_l must be > 0, got {self.b_l}")
        if not 0.0 < self.omega_l < math.pi / 2:
            raise ValueError(f"omega_l must lie in (0, pi/2), got {self.omega_l}")
        if not self.anchor > 0.0:
            raise ValueError(
                f"contour leaves the right half-plane: sigma_l - b_l sin omega_l = {self.anchor}"
            )
        if self.grid.n_neg != 0 or self.grid.offset != 0.0:
            raise ValueError("Bromwich grids cover y >= 0 only, starting at 0")

    @property
    def anchor(self) -> float:
        """Re q at y=0, the rightmost (real) point of the contour."""
        return self.sigma_l - self.b_l * math.sin(self.omega_l)

    def point(self, y):
        y = np.asarray(y, dtype=float)
        return self.sigma_l + 1j * self.b_l * np.sinh(1j * self.omega_l + y)

    def derivative(self, y):
        """d q / d y (the factor i is part of the derivative)."""
        y = np.asarray(y, dtype=float)
        return 1j * self.b_l * np.cosh(1j * self.omega_l + y)

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.point(self.grid.nodes)

    @cached_property
    def derivs(self) -> np.ndarray:
        return self.derivative(self.grid.nodes)


@dataclass(frozen=True)
class DeformationReport:
    """Outcome of an admissibility scan over (q, node) pairs."""

    ok: bool
    n_checked: int
    min_margin: float
    violations: tuple

    def raise_if_failed(self) -> None:
        if not self.ok:
            q, node, w = self.violations[0]
            raise DeformationError(
                f"1 + psi/q comes within {self.min_margin:.3e} (relative) of the cut "
                f"(-inf, 0] at q={q}, node={node}, value={w}; shrink |omega| or move anchors "
                f"({len(self.violations)} offending pairs)"
            )


def _cone_halfwidths(profile: RegularityProfile) -> tuple:
    gp_m, gp_p = profile.positive_cone_angles
    if gp_p <= _DEGENERATE_CONE or -gp_m <= _DEGENERATE_CONE:
        raise DeformationError(
            f"positivity cone ({gp_m}, {gp_p}) too narrow for sinh deformation"
        )
    return -gp_m, gp_p


def _fit_scale(apex: float, omega: float, lo: float, hi: float, d: float) -> float:
    """Largest b <= 1 keeping the rotated apex inside (lo, hi) for |s| <= d.

    Rotating the y-strip by s tilts the wing angle to omega+s and moves the
    imaginary-axis crossing to omega1 + b sin(omega+s); both window walls must
    stay clear over the whole strip, which bounds b linearly.
    """
    if not lo < apex < hi:
        raise ValueError(f"apex {apex} outside window ({lo}, {hi})")
    b = 1.0
    # sin is not monotone past +-pi/2; use the true extrema over the strip
    s_hi = 1.0 if omega + d >= math.pi / 2 else math.sin(omega + d)
    s_lo = -1.0 if omega - d <= -math.pi / 2 else math.sin(omega - d)
    rise = s_hi - math.sin(omega)
    if rise > 0.0:
        b = min(b, _APEX_SAFETY * (hi - apex) / rise)
    drop = math.sin(omega) - s_lo
    if drop > 0.0:
        b = min(b, _APEX_SAFETY * (apex - lo) / drop)
    return b


def _strip_halfwidth_flat(apex: float, b: float, lo: float, hi: float, cone: float) -> float:
    # omega=0 has no natural d=|omega|; the strip is cut off by whichever of
    # the cone and the two window walls the rotated apex reaches first.
    up = math.asin(min(1.0, (hi - apex) / b))
    down = math.asin(min(1.0, (apex - lo) / b))
    return 0.9 * min(cone, up, down)


def _sinh_with_budget(
    apex: float,
    omega: float,
    window: tuple,
    d: float,
    tol: float,
    *,
    b: float,
    hardy_norm: float,
    phase_gap: float,
    decay_rate: float,
    zeta: float,
    n_nodes: int,
    cone: float = math.pi / 2,
) -> SinhContour:
    lo, hi = window
    if b is None:
        if omega == 0.0:
            b = 1.0
        else:
            b = _fit_scale(apex, omega, lo, hi, d)
    if d is None:
        d = _strip_halfwidth_flat(apex, b, lo, hi, cone)
    omega1 = apex - b * math.sin(omega)
    if zeta is None:
        zeta = step_for_tolerance(ErrorBudget(tol=tol, d=d, hardy_norm_est=hardy_norm))
    if n_nodes is None:
        gap_rate = phase_gap * b * abs(math.sin(omega))

        def log_envelope(y: float) -> float:
            out = -decay_rate * y
            if gap_rate > 0.0:
                out -= gap_rate * (math.cosh(y) - 1.0)
            return out

        lam = truncation_for_tolerance(log_envelope, tol)
        n_nodes = int(math.ceil(_OVERSIZE * lam / zeta)) + 2
    grid = TrapezoidGrid(zeta=zeta, n_neg=n_nodes, n_pos=n_nodes)
    return SinhContour(omega1=omega1, b=b, omega=omega, grid=grid, strip_halfwidth=d)


def select_params(
    profile: RegularityProfile,
    role: str,
    tol: float,
    *,
    family: str = "gwr",
    x_sign: int = 0,
    T: float = None,
    sigma_floor: float = 0.0,
    apex: float = None,
    b: float = None,
    omega: float = None,
    hardy_norm: float = 1.0,
    phase_gap: float = 0.0,
    decay_rate: float = 1.0,
    zeta: float = None,
    n_nodes: int = None,
):
    """Build a contour for one of the roles xi_plus | eta_minus | one_dim | bromwich.

    Wing angles follow the preset family: half the positivity cone for real-q
    (GWR) work, and the two tested Laplace-coupled presets otherwise. The
    strip half-width for the error budget is d = |omega| (the flat one_dim
    case falls back to a geometric bound). phase_gap is the coefficient kappa
    of an e^{i kappa xi} oscillation (kappa >= 0 after orienting wings toward
    decay); decay_rate is the power-law envelope exponent in y. Passing
    zeta/n_nodes overrides the budget, for CLI experimentation.

    Parameters are recipes, not proofs: run validate_deformation on the
    result before trusting it with a log.
    """
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(_FAMILIES)}")
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    preset = _FAMILIES[family]
    cone_down, cone_up = _cone_halfwidths(profile)
    mu_minus, mu_plus = profile.strip
    ratio = preset["wing_ratio"]

    if role == "xi_plus":
        if mu_plus <= 0.0:
            raise DeformationError("xi_plus contour needs mu_plus > 0")
        w = cone_up * ratio if omega is None else omega
        a = 0.5 * mu_plus if apex is None else apex
        return _sinh_with_budget(
            a, w, (0.0, mu_plus), abs(w), tol,
            b=b, hardy_norm=hardy_norm, phase_gap=phase_gap, decay_rate=decay_rate,
            zeta=zeta, n_nodes=n_nodes,
        )
    if role == "eta_minus":
        if mu_minus >= 0.0:
            raise DeformationError("eta_minus contour needs mu_minus < 0")
        w = -cone_down * ratio if omega is None else omega
        a = 0.5 * mu_minus if apex is None else apex
        return _sinh_with_budget(
            a, w, (mu_minus, 0.0), abs(w), tol,
            b=b, hardy_norm=hardy_norm, phase_gap=phase_gap, decay_rate=decay_rate,
            zeta=zeta, n_nodes=n_nodes,
        )
    if role == "one_dim":
        if x_sign > 0:
            # phase decays upward; contour dropped below 0, the 0-pole residue
            # is accounted for by the caller
            w = cone_up * ratio if omega is None else omega
            a = 0.5 * mu_minus if apex is None else apex
            return _sinh_with_budget(
                a, w, (mu_minus, 0.0), abs(w), tol,
                b=b, hardy_norm=hardy_norm, phase_gap=phase_gap, decay_rate=decay_rate,
                zeta=zeta, n_nodes=n_nodes,
            )
        if x_sign < 0:
            w = -cone_down * ratio if omega is None else omega
            a = 0.5 * mu_plus if apex is None else apex
            return _sinh_with_budget(
                a, w, (0.0, mu_plus), abs(w), tol,
                b=b, hardy_norm=hardy_norm, phase_gap=phase_gap, decay_rate=decay_rate,
                zeta=zeta, n_nodes=n_nodes,
            )
        w = 0.0 if omega is None else omega
        a = 0.5 * mu_plus if apex is None else apex
        d = abs(w) if w != 0.0 else None
        return _sinh_with_budget(
            a, w, (0.0, mu_plus), d, tol,
            b=b, hardy_norm=hardy_norm, phase_gap=phase_gap, decay_rate=decay_rate,
            zeta=zeta, n_nodes=n_nodes, cone=min(cone_down, cone_up),
        )
    if role == "bromwich":
        if preset["omega_ell"] is None:
            raise DeformationError("family 'gwr' keeps q real; no Bromwich contour to build")
        if profile.order < 1.0 and profile.drift != 0.0:
            raise DeformationError(
                "sinh Laplace contours are unavailable for finite-variation exponents "
                "with drift; use the real-q inverter"
            )
        if T is None or not T > 0.0:
            raise ValueError("bromwich role needs the horizon T > 0")
        w_l = preset["omega_ell"] if omega is None else omega
        anchor = max(1.0 / T, sigma_floor, 0.1)
        if b is None:
            # kappa ~ 2 e-foldings per unit y, capped so the whole error strip
            # |s| <= omega_l keeps the rotated apex in the right half-plane
            b = min(
                2.0 / (T * math.sin(w_l)),
                0.9 * anchor / (math.sin(2.0 * w_l) - math.sin(w_l)),
            )
        sigma_l = anchor + b * math.sin(w_l)
        d = w_l
        if zeta is None:
            zeta = step_for_tolerance(ErrorBudget(tol=tol, d=d, hardy_norm_est=hardy_norm))
        if n_nodes is None:
            decay = T * b * math.sin(w_l)

            def log_envelope(y: float) -> float:
                return T * anchor - decay * (math.cosh(y) - 1.0) - y

            lam = truncation_for_tolerance(log_envelope, tol)
            n_nodes = int(math.ceil(_OVERSIZE * lam / zeta)) + 2
        grid = TrapezoidGrid(zeta=zeta, n_neg=0, n_pos=n_nodes)
        return BromwichContour(
            sigma_l=sigma_l, b_l=b, omega_l=w_l, grid=grid, strip_halfwidth=d
        )
    raise ValueError(f"unknown role {role!r}")


def vertical_gap(plus: SinhContour, minus: SinhContour) -> float:
    """Minimal vertical separation of an upward and a downward contour.

    With wings up, Im chi+ >= apex+ everywhere; with wings down, Im chi- <=
    apex-. The gap bounds |xi+ - xi-| from below, hence the 1/(xi+-xi-)
    kernels from above.
    """
    if not plus.omega > 0.0:
        raise ValueError("plus contour must have upward wings")
    if not minus.omega < 0.0:
        raise ValueError("minus contour must have downward wings")
    gap = plus.apex - minus.apex
    if not gap > 0.0:
        raise DeformationError(
            f"contours intersect: apex+ = {plus.apex} <= apex- = {minus.apex}"
        )
    return gap


def validate_deformation(model: LevyModel, contour, q_set) -> DeformationReport:
    """Scan 1 + psi(node)/q over all nodes and q for cut crossings.

    For SL exponents with every q real and positive, admissibility reduces to
    the apex condition q + psi(i apex) > 0 and only that is checked. The full
    scan measures the relative distance of 1 + psi/q to (-inf, 0] and flags
    anything below the branch-safety floor.
    """
    if not isinstance(contour, SinhContour):
        raise TypeError("validate_deformation checks xi/eta contours; pass a SinhContour")
    qs = np.atleast_1d(np.asarray(q_set, dtype=complex))
    if qs.size == 0:
        raise ValueError("q_set must be nonempty")
    floor = 1e-8
    apex = contour.apex

    all_real = bool(np.all((qs.imag == 0.0) & (qs.real > 0.0)))
    if model.profile.is_SL and all_real:
        psi_apex = complex(model.psi(1j * apex))
        margins = qs.real + psi_apex.real
        bad = margins <= 0.0
        if np.any(bad):
            j = int(np.argmax(bad))
            viol = ((complex(qs[j]), 1j * apex, complex(qs[j]) + psi_apex),)
            return DeformationReport(
                ok=False, n_checked=qs.size, min_margin=float(margins.min()), violations=viol
            )
        return DeformationReport(
            ok=True, n_checked=qs.size, min_margin=float(margins.min()), violations=()
        )

    nodes = contour.nodes
    psi_vals = np.asarray(model.psi(nodes))
    w = 1.0 + psi_vals[None, :] / qs[:, None]
    dist = np.where(w.real <= 0.0, np.abs(w.imag), np.abs(w))
    scale = 1.0 + np.abs(psi_vals[None, :]) / np.abs(qs[:, None])
    margin = dist / scale
    bad = margin < floor
    min_margin = float(margin.min())
    if np.any(bad):
        qi, ni = np.nonzero(bad)
        viol = tuple(
            (complex(qs[i]), complex(nodes[j]), complex(w[i, j]))
            for i, j in list(zip(qi, ni))[:10]
        )
        return DeformationReport(
            ok=False, n_checked=int(w.size), min_margin=min_margin, violations=viol
        )
    return DeformationReport(ok=True, n_checked=int(w.size), min_margin=min_margin, violations=())
