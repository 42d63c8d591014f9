"""Characteristic exponents with the analytic-continuation metadata contour selection needs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import gamma as _gamma

__all__ = [
    "RegularityProfile",
    "LevyModel",
    "KoBoLModel",
    "BrownianModel",
    "kobol",
    "brownian",
    "psi",
    "calibrate_second_moment",
    "c_infinity",
]

ArrayLike = Union[complex, float, np.ndarray]


@dataclass(frozen=True)
class RegularityProfile:
    """Analyticity data of a characteristic exponent.

    order: growth exponent nu of psi along rays in the cone.
    strip: (mu_minus, mu_plus), the horizontal strip Im xi in (mu_minus, mu_plus)
        of analyticity around the real line.
    cone_angles: (gamma_minus, gamma_plus) of the continuation cone.
    positive_cone_angles: (gamma'_minus, gamma'_plus), the subcone where
        Re psi grows to +infinity; deformations must stay inside it.
    drift: the linear-term coefficient mu of psi.
    is_SL: True when q + psi(xi) = 0 has no roots off the imaginary axis
        for q > 0, which makes every sinh-deformation admissible at real q.
    """

    order: float
    strip: tuple
    cone_angles: tuple
    positive_cone_angles: tuple
    drift: float
    is_SL: bool

    def __post_init__(self) -> None:
        mu_m, mu_p = self.strip
        if not (mu_m < mu_p and mu_m <= 0.0 <= mu_p):
            raise ValueError(f"strip must straddle 0, got {self.strip}")
        if mu_m == 0.0 and mu_p == 0.0:
            raise ValueError("strip must have positive width on one side of 0")
        g_m, g_p = self.cone_angles
        gp_m, gp_p = self.positive_cone_angles
        if not (g_m < 0.0 < g_p):
            raise ValueError(f"cone_angles must satisfy gamma-<0<gamma+, got {self.cone_angles}")
        if not (g_m <= gp_m <= 0.0 <= gp_p <= g_p):
            raise ValueError(
                f"positive cone {self.positive_cone_angles} must sit inside cone {self.cone_angles}"
            )
        if abs(gp_m) + gp_p <= 0.0:
            raise ValueError("positive cone must have positive opening")
        if not 0.0 < self.order <= 2.0:
            raise ValueError(f"order must lie in (0, 2], got {self.order}")


def _require_off_cuts(z: np.ndarray, cut_name: str) -> None:
    # Principal powers are ambiguous exactly on (-inf, 0].
    on_cut = (z.real <= 0.0) & (z.imag == 0.0)
    if np.any(on_cut):
        j = int(np.argmax(on_cut))
        raise ValueError(
            f"xi lies on the {cut_name} cut (argument {z.reshape(-1)[j] if z.ndim else z}"
            f" on (-inf, 0])"
        )


class LevyModel:
    """Base interface: immutable parameters plus psi evaluation."""

    kind: str
    profile: RegularityProfile

    def psi0(self, xi: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def psi(self, xi: ArrayLike) -> ArrayLike:
        """Characteristic exponent, E e^{i xi X_t} = e^{-t psi(xi)}."""
        return self.psi0(xi) - 1j * self.profile.drift * np.asarray(xi, dtype=complex)

    def second_moment(self) -> float:
        """psi''(0), the second instantaneous moment."""
        raise NotImplementedError

    def mean_rate(self) -> float:
        """E X_1 = i psi'(0)."""
        raise NotImplementedError


@dataclass(frozen=True)
class KoBoLModel(LevyModel):
    """Two-sided tempered-stable exponent.

    psi0(xi) = c+ G(-nu+) ((-lm)^nu+ - (-lm - i xi)^nu+)
             + c- G(-nu-) ((lp)^nu-  - (lp + i xi)^nu-),
    with lm = lambda_minus < 0 <= lambda_plus = lp and principal powers,
    plus drift term -i mu xi.
    """

    c_plus: float
    c_minus: float
    nu_plus: float
    nu_minus: float
    lambda_minus: float
    lambda_plus: float
    mu: float = 0.0
    kind: str = field(init=False)
    profile: RegularityProfile = field(init=False)

    def __post_init__(self) -> None:
        for name, nu in (("nu_plus", self.nu_plus), ("nu_minus", self.nu_minus)):
            if not 0.0 < nu < 2.0 or abs(nu - 1.0) < 1e-12:
                raise ValueError(
                    f"unsupported {name}={nu}: this family needs nu in (0,2) with nu != 1"
                )
        if self.c_plus < 0.0 or self.c_minus < 0.0:
            raise ValueError("jump intensities c_plus, c_minus must be >= 0")
        if self.c_plus + self.c_minus == 0.0:
            raise ValueError("at least one of c_plus, c_minus must be > 0")
        if not (self.lambda_minus < self.lambda_plus and self.lambda_minus <= 0.0 <= self.lambda_plus):
            raise ValueError(
                f"need lambda_minus <= 0 <= lambda_plus with a gap, got "
                f"({self.lambda_minus}, {self.lambda_plus})"
            )
        symmetric = self.nu_plus == self.nu_minus and self.c_plus == self.c_minus
        object.__setattr__(self, "kind", "kobol-symmetric" if symmetric else "kobol-general")
        order = max(self.nu_plus, self.nu_minus)
        # Positivity cone: Re psi0(rho e^{i phi}) ~ Re(c_inf e^{i order phi}) rho^order
        # stays positive while |order*phi + arg c_inf| < pi/2, capped by the cone.
        ac = 0.0 + 0.0j
        if self.nu_plus == order:
            ac += -self.c_plus * _gamma(-order) * np.exp(-1j * order * math.pi / 2)
        if self.nu_minus == order:
            ac += -self.c_minus * _gamma(-order) * np.exp(1j * order * math.pi / 2)
        theta = math.atan2(ac.imag, ac.real)
        gp_plus = min(math.pi / 2, (math.pi / 2 - theta) / order)
        gp_minus = max(-math.pi / 2, (-math.pi / 2 - theta) / order)
        object.__setattr__(
            self,
            "profile",
            RegularityProfile(
                order=order,
                strip=(self.lambda_minus, self.lambda_plus),
                cone_angles=(-math.pi / 2, math.pi / 2),
                positive_cone_angles=(gp_minus, gp_plus),
                drift=self.mu,
                is_SL=True,
            ),
        )

    def psi0(self, xi: ArrayLike) -> ArrayLike:
        xi_arr = np.asarray(xi, dtype=complex)
        z_m = -self.lambda_minus - 1j * xi_arr
        z_p = self.lambda_plus + 1j * xi_arr
        _require_off_cuts(np.atleast_1d(z_m), f"Im xi <= {self.lambda_minus}")
        _require_off_cuts(np.atleast_1d(z_p), f"Im xi >= {self.lambda_plus}")
        # Constant terms go through the same numpy complex power as the
        # xi terms so psi0(0) cancels to exactly 0.
        out = self.c_plus * _gamma(-self.nu_plus) * (
            np.complex128(-self.lambda_minus) ** self.nu_plus - z_m**self.nu_plus
        ) + self.c_minus * _gamma(-self.nu_minus) * (
            np.complex128(self.lambda_plus) ** self.nu_minus - z_p**self.nu_minus
        )
        return out if isinstance(xi, np.ndarray) else complex(out)

    def second_moment(self) -> float:
        return float(
            self.c_plus * _gamma(2.0 - self.nu_plus) * (-self.lambda_minus) ** (self.nu_plus - 2.0)
            + self.c_minus * _gamma(2.0 - self.nu_minus) * self.lambda_plus ** (self.nu_minus - 2.0)
        )

    def mean_rate(self) -> float:
        return float(
            self.mu
            + self.c_plus * _gamma(1.0 - self.nu_plus) * (-self.lambda_minus) ** (self.nu_plus - 1.0)
            - self.c_minus * _gamma(1.0 - self.nu_minus) * self.lambda_plus ** (self.nu_minus - 1.0)
        )


@dataclass(frozen=True)
class BrownianModel(LevyModel):
    """psi(xi) = sigma2 xi^2 / 2 - i mu xi, for oracle cross-checks.

    The exponent is entire; strip_halfwidth is the finite working strip
    handed to contour construction (admissibility per q is verified
    separately, so the value only sets anchor scales).
    """

    sigma2: float
    mu: float = 0.0
    strip_halfwidth: float = 1.0
    kind: str = field(init=False, default="brownian")
    profile: RegularityProfile = field(init=False)

    def __post_init__(self) -> None:
        if not self.sigma2 > 0.0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        if not self.strip_halfwidth > 0.0:
            raise ValueError("strip_halfwidth must be > 0")
        object.__setattr__(self, "kind", "brownian")
        object.__setattr__(
            self,
            "profile",
            RegularityProfile(
                order=2.0,
                strip=(-self.strip_halfwidth, self.strip_halfwidth),
                cone_angles=(-math.pi / 2, math.pi / 2),
                positive_cone_angles=(-math.pi / 4, math.pi / 4),
                drift=self.mu,
                is_SL=True,
            ),
        )

    def psi0(self, xi: ArrayLike) -> ArrayLike:
        xi_arr = np.asarray(xi, dtype=complex)
        out = 0.5 * self.sigma2 * xi_arr**2
        return out if isinstance(xi, np.ndarray) else complex(out)

    def second_moment(self) -> float:
        return float(self.sigma2)

    def mean_rate(self) -> float:
        return float(self.mu)


def calibrate_second_moment(
    m2: float,
    nu: float = None,
    lambda_minus: float = None,
    lambda_plus: float = None,
    kind: str = "kobol",
) -> float:
    """Intensity c (or sigma2) making psi''(0) = m2.

    For the symmetric two-sided family,
    psi''(0) = c Gamma(2-nu) ((-lambda_minus)^(nu-2) + lambda_plus^(nu-2)).
    For kind="brownian" the answer is m2 itself.
    """
    if not m2 > 0.0:
        raise ValueError(f"m2 must be > 0, got {m2}")
    if kind == "brownian":
        return float(m2)
    if kind != "kobol":
        raise ValueError(f"unknown model kind {kind!r}")
    if nu is None or lambda_minus is None or lambda_plus is None:
        raise ValueError("kobol calibration needs nu, lambda_minus, lambda_plus")
    denom = _gamma(2.0 - nu) * (
        (-lambda_minus) ** (nu - 2.0) + lambda_plus ** (nu - 2.0)
    )
    return float(m2 / denom)


def kobol(
    nu: float,
    lambda_minus: float,
    lambda_plus: float,
    c: float = None,
    m2: float = None,
    mu: float = 0.0,
) -> KoBoLModel:
    """Symmetric-intensity model; pass either c directly or m2 to calibrate it."""
    if (c is None) == (m2 is None):
        raise ValueError("pass exactly one of c, m2")
    if c is None:
        c = calibrate_second_moment(m2, nu=nu, lambda_minus=lambda_minus, lambda_plus=lambda_plus)
    return KoBoLModel(
        c_plus=c,
        c_minus=c,
        nu_plus=nu,
        nu_minus=nu,
        lambda_minus=lambda_minus,
        lambda_plus=lambda_plus,
        mu=mu,
    )


def brownian(sigma2: float, mu: float = 0.0, strip_halfwidth: float = 1.0) -> BrownianModel:
    return BrownianModel(sigma2=sigma2, mu=mu, strip_halfwidth=strip_halfwidth)


def psi(model: LevyModel, xi: ArrayLike) -> ArrayLike:
    return model.psi(xi)


def c_infinity(model: LevyModel, phi: float) -> complex:
    """Leading coefficient of psi0(rho e^{i phi}) ~ c_inf(phi) rho^order.

    Terms of lower order than the profile's are dropped; when both jump
    sides share the order their contributions add.
    """
    g_m, g_p = model.profile.cone_angles
    if not g_m < phi < g_p:
        raise ValueError(f"phi={phi} outside cone ({g_m}, {g_p})")
    if isinstance(model, BrownianModel):
        return complex(0.5 * model.sigma2 * np.exp(2j * phi))
    if not isinstance(model, KoBoLModel):
        raise ValueError(f"no asymptotic coefficient for kind {model.kind!r}")
    order = model.profile.order
    out = 0.0 + 0.0j
    # psi0 ~ -c+ G(-nu+) (-i xi)^nu+ - c- G(-nu-) (i xi)^nu- as |xi| -> inf,
    # and (+-i e^{i phi})^nu = e^{i nu (phi +- pi/2)}.
    if model.nu_plus == order:
        out += -model.c_plus * _gamma(-model.nu_plus) * np.exp(
            1j * model.nu_plus * (phi - math.pi / 2)
        )
    if model.nu_minus == order:
        out += -model.c_minus * _gamma(-model.nu_minus) * np.exp(
            1j * model.nu_minus * (phi + math.pi / 2)
        )
    return complex(out)
