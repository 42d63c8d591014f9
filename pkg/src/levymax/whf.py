"""Wiener-Hopf factors on sinh contours: direct Cauchy integrals, continuation identity, atoms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contours import (
    DeformationError,
    SinhContour,
    select_params,
    validate_deformation,
    vertical_gap,
)
from .models import LevyModel
from .quad import (
    ErrorBudget,
    TrapezoidGrid,
    step_for_tolerance,
    trapezoid_sum,
    truncation_for_tolerance,
)

__all__ = [
    "WhfTable",
    "build_table",
    "cross_kernel",
    "phi_plus",
    "phi_minus",
    "phi_from_identity",
    "decompose",
]

# Targets closer to an integration node than this make the 1/(xi-eta)
# kernel meaningless; the grids must be shifted apart, not regularized.
_KERNEL_FLOOR = 1e-9


@dataclass(frozen=True)
class WhfTable:
    """Factor values of one q on a fixed pair of pricing contours.

    plus_on_minus holds the supremum factor at the lower-contour nodes and
    minus_on_plus the infimum factor at the upper-contour nodes, which is
    exactly what the double pricing integral consumes. psi_plus/psi_minus
    cache the characteristic exponent there; a_plus/a_minus are the atom
    masses, zero unless the exponent has finite variation and drift.
    """

    q: complex
    plus_on_minus: np.ndarray
    minus_on_plus: np.ndarray
    a_plus: float
    a_minus: float
    psi_plus: np.ndarray
    psi_minus: np.ndarray


def cross_kernel(targets, integration_contour: SinhContour) -> np.ndarray:
    """Dense Cauchy kernel 1/(target_j - node_k) with a proximity guard.

    targets may be a SinhContour (its nodes are used) or a complex array.
    The negative transpose serves the swapped orientation, so one matrix
    covers both factor directions on a contour pair.
    """
    if isinstance(targets, SinhContour):
        targets = targets.nodes
    t = np.atleast_1d(np.asarray(targets, dtype=complex))
    nodes = integration_contour.nodes
    diff = t[:, None] - nodes[None, :]
    dist = np.abs(diff)
    jk = np.unravel_index(int(np.argmin(dist)), dist.shape)
    if dist[jk] < _KERNEL_FLOOR:
        raise ValueError(
            f"singular kernel: target {t[jk[0]]} is within {dist[jk]:.3e} of "
            f"integration node {nodes[jk[1]]}; shift one of the grids"
        )
    return 1.0 / diff


def _factor_exponent(targets, contour, sign, log_g, kernel):
    # (sign/2 pi i) * xi * trapezoid of lnG(eta)/(eta (xi - eta))
    weights = log_g / contour.nodes * contour.derivs
    pref = sign * -1j * contour.grid.zeta / (2.0 * math.pi)
    return pref * targets * (kernel @ weights)


def _require_below(targets, contour, name):
    lo = float(np.min(targets.imag))
    hi = float(np.max(contour.nodes.imag))
    if not lo > hi:
        raise ValueError(
            f"integration contour must lie strictly below every target for {name} "
            f"(min Im target = {lo:.6g} <= max Im node = {hi:.6g}); shift the contour "
            "or pass assume_separated=True for a geometry verified by construction"
        )


def _require_above(targets, contour, name):
    hi = float(np.max(targets.imag))
    lo = float(np.min(contour.nodes.imag))
    if not hi < lo:
        raise ValueError(
            f"integration contour must lie strictly above every target for {name} "
            f"(max Im target = {hi:.6g} >= min Im node = {lo:.6g}); shift the contour "
            "or pass assume_separated=True for a geometry verified by construction"
        )


def phi_plus(
    model: LevyModel,
    q: complex,
    xi_targets,
    integration_contour: SinhContour,
    *,
    assume_separated: bool = False,
    check: bool = True,
    psi_values=None,
    kernel=None,
):
    """Supremum factor at xi_targets, integrating over a contour below them.

    Evaluates exp[(1/2 pi i) xi \\int ln(1 + psi(eta)/q) / (eta (xi - eta)) deta]
    by the trapezoid rule on the contour's sinh grid. Valid for targets in
    the domain above the integration contour; the conservative check
    compares Im ranges, and assume_separated bypasses it for geometries
    that are separated by construction (e.g. the same contour shifted
    vertically downward).

    Parameters
    ----------
    model : LevyModel
    q : complex
        Laplace variable; admissibility for this q should have been checked
        (check=True reruns validate_deformation on the contour).
    xi_targets : complex scalar or array
    integration_contour : SinhContour
    psi_values, kernel : arrays, optional
        Precomputed psi at the contour nodes and cross_kernel(targets,
        contour), for callers looping over q.

    Returns
    -------
    complex scalar or array, matching xi_targets.
    """
    targets = np.asarray(xi_targets, dtype=complex)
    flat = np.atleast_1d(targets)
    if check:
        validate_deformation(model, integration_contour, [q]).raise_if_failed()
    if not assume_separated:
        _require_below(flat, integration_contour, "phi_plus")
    if psi_values is None:
        psi_values = np.asarray(model.psi(integration_contour.nodes))
    if kernel is None:
        kernel = cross_kernel(flat, integration_contour)
    log_g = np.log(1.0 + psi_values / q)
    out = np.exp(_factor_exponent(flat, integration_contour, +1, log_g, kernel))
    return out if targets.ndim else complex(out[0])


def phi_minus(
    model: LevyModel,
    q: complex,
    xi_targets,
    integration_contour: SinhContour,
    *,
    assume_separated: bool = False,
    check: bool = True,
    psi_values=None,
    kernel=None,
):
    """Infimum factor at xi_targets, integrating over a contour above them.

    Mirror of phi_plus with the opposite sign in the exponent.
    """
    targets = np.asarray(xi_targets, dtype=complex)
    flat = np.atleast_1d(targets)
    if check:
        validate_deformation(model, integration_contour, [q]).raise_if_failed()
    if not assume_separated:
        _require_above(flat, integration_contour, "phi_minus")
    if psi_values is None:
        psi_values = np.asarray(model.psi(integration_contour.nodes))
    if kernel is None:
        kernel = cross_kernel(flat, integration_contour)
    log_g = np.log(1.0 + psi_values / q)
    out = np.exp(_factor_exponent(flat, integration_contour, -1, log_g, kernel))
    return out if targets.ndim else complex(out[0])


def phi_from_identity(model: LevyModel, q: complex, phi_other, psi_values):
    """Opposite factor via the factorization identity q/((q + psi) phi_other).

    phi_other and psi_values are aligned arrays on the same nodes. The model
    argument is kept for signature symmetry with the direct evaluators; psi
    is always taken from psi_values.
    """
    other = np.asarray(phi_other, dtype=complex)
    psi_v = np.asarray(psi_values, dtype=complex)
    denom = (q + psi_v) * other
    bad = (denom == 0.0) | ~np.isfinite(denom)
    if np.any(np.atleast_1d(bad)):
        raise ValueError(
            "zero or non-finite divisor in the factorization identity; "
            "the contour is invalid for this q"
        )
    return q / denom


def build_table(
    model: LevyModel,
    q: complex,
    plus_contour: SinhContour,
    minus_contour: SinhContour,
    *,
    psi_plus_values=None,
    psi_minus_values=None,
    kernel=None,
    check: bool = True,
) -> WhfTable:
    """Assemble the per-q factor table on a wings-up / wings-down contour pair.

    The direct representations give the supremum factor on the upper grid
    (integrating over the lower) and the infimum factor on the lower grid;
    the continuation identity then fills in the cross values the table
    stores. kernel is cross_kernel(plus_contour, minus_contour); it and the
    psi arrays are q-independent, so callers looping over q should
    precompute and pass them. Tables are immutable and safe to build
    concurrently for distinct q.
    """
    vertical_gap(plus_contour, minus_contour)
    if check:
        validate_deformation(model, plus_contour, [q]).raise_if_failed()
        validate_deformation(model, minus_contour, [q]).raise_if_failed()
    psi_p = (
        np.asarray(model.psi(plus_contour.nodes))
        if psi_plus_values is None
        else np.asarray(psi_plus_values, dtype=complex)
    )
    psi_m = (
        np.asarray(model.psi(minus_contour.nodes))
        if psi_minus_values is None
        else np.asarray(psi_minus_values, dtype=complex)
    )
    if kernel is None:
        kernel = cross_kernel(plus_contour, minus_contour)
    log_g_m = np.log(1.0 + psi_m / q)
    log_g_p = np.log(1.0 + psi_p / q)
    plus_on_plus = np.exp(
        _factor_exponent(plus_contour.nodes, minus_contour, +1, log_g_m, kernel)
    )
    minus_on_minus = np.exp(
        _factor_exponent(minus_contour.nodes, plus_contour, -1, log_g_p, -kernel.T)
    )
    a_plus, a_minus = _atom_masses(model, q)
    return WhfTable(
        q=complex(q),
        plus_on_minus=phi_from_identity(model, q, minus_on_minus, psi_m),
        minus_on_plus=phi_from_identity(model, q, plus_on_plus, psi_p),
        a_plus=a_plus,
        a_minus=a_minus,
        psi_plus=psi_p,
        psi_minus=psi_m,
    )


def _flat_contour(apex, lo, hi, cone, decay_rate, tol):
    # b=1 flat line; strip width limited by the window walls and the cone,
    # as for the flat one-dimensional pricing contour.
    d = 0.9 * min(cone, math.asin(min(1.0, hi - apex)), math.asin(min(1.0, apex - lo)))
    zeta = step_for_tolerance(ErrorBudget(tol=tol, d=d, hardy_norm_est=1.0))
    lam = truncation_for_tolerance(lambda y: -decay_rate * y, tol)
    n = int(math.ceil(1.2 * lam / zeta)) + 2
    return SinhContour(
        omega1=apex,
        b=1.0,
        omega=0.0,
        grid=TrapezoidGrid(zeta=zeta, n_neg=n, n_pos=n),
        strip_halfwidth=d,
    )


def _modified_log_g(model, q, contour):
    # ln of G = 1 + psi0/(q - i mu eta), the drift-split factor argument,
    # with its own branch scan (validate_deformation checks 1 + psi/q, not this).
    mu = model.profile.drift
    nodes = contour.nodes
    denom = q - 1j * mu * nodes
    rel_denom = np.abs(denom) / (abs(q) + np.abs(mu * nodes) + 1e-300)
    w = 1.0 + np.asarray(model.psi0(nodes)) / denom
    dist = np.where(w.real <= 0.0, np.abs(w.imag), np.abs(w))
    margin = float(np.min(dist / (1.0 + np.abs(w - 1.0))))
    if margin < 1e-8 or float(np.min(rel_denom)) < 1e-10:
        raise DeformationError(
            f"drift-split factor argument approaches its cut at q={q} "
            f"(margin {margin:.3e}); raise the Laplace shift or pass a contour "
            "closer to the real axis"
        )
    return np.log(w)


def _atom_masses(model: LevyModel, q, *, tol: float = 1e-12):
    """(a_plus, a_minus) point masses of the extremum distributions at 0."""
    prof = model.profile
    if prof.order >= 1.0 or prof.drift == 0.0:
        return 0.0, 0.0
    qc = complex(q)
    if qc.imag != 0.0 or not qc.real > 0.0:
        raise ValueError(
            "atom masses of finite-variation drifted exponents are defined for "
            f"real q > 0 only, got q={q}; the deformed Laplace contour is not "
            "available for these models"
        )
    qr = qc.real
    mu = prof.drift
    mu_minus, mu_plus = prof.strip
    cone = min(-prof.positive_cone_angles[0], prof.positive_cone_angles[1])
    decay = max(1.0 - prof.order, 0.05)
    if mu > 0.0:
        # infimum atom; the integration line sits above 0
        contour = _flat_contour(0.5 * mu_plus, 0.0, mu_plus, cone, decay, tol)
        sign = 1j
    else:
        # supremum atom; mirror line below 0
        contour = _flat_contour(0.5 * mu_minus, mu_minus, 0.0, cone, decay, tol)
        sign = -1j
    log_g = _modified_log_g(model, qr, contour)
    weights = log_g / contour.nodes * contour.derivs
    integral = trapezoid_sum(contour.grid, lambda _t: weights)
    expo = sign * integral / (2.0 * math.pi)
    if abs(expo.imag) > 1e-7:
        raise DeformationError(
            f"atom integral lost Hermitian symmetry (imaginary part {expo.imag:.3e}); "
            "the atom contour is inadmissible for this q"
        )
    a = math.exp(expo.real)
    if mu > 0.0:
        return 0.0, a
    return a, 0.0


def _drift_variant_contour(model, q, below, tol):
    # Integration contour for the drift-split representation. The rational
    # prefactor q/(q - i mu xi) has a pole at depth q/|mu|; the apex must
    # stay between it and 0.
    prof = model.profile
    mu = prof.drift
    mu_minus, mu_plus = prof.strip
    decay = max(1.0 - prof.order, 0.05)
    if below:
        apex = 0.5 * max(mu_minus, -q / mu)
        return select_params(prof, "eta_minus", tol, apex=apex, decay_rate=decay)
    apex = 0.5 * min(mu_plus, q / abs(mu))
    return select_params(prof, "xi_plus", tol, apex=apex, decay_rate=decay)


def _phi_fv_drift(model, q, targets, contour, sign):
    # Drift-split representation: rational prefactor carrying the 1/xi decay
    # times the Cauchy exponential built from the modified argument.
    mu = model.profile.drift
    log_g = _modified_log_g(model, q, contour)
    kernel = cross_kernel(targets, contour)
    expo = _factor_exponent(targets, contour, sign, log_g, kernel)
    return q / (q - 1j * mu * targets) * np.exp(expo)


def decompose(model: LevyModel, q, side: str, *, tol: float = 1e-12):
    """Atom mass and an evaluator for the factor with its atom removed.

    Returns (a, evaluate); evaluate(xi_targets, integration_contour=None,
    assume_separated=False) yields phi^{side}_q(xi) - a. Exponents of order
    >= 1, or without drift, have a = 0 on both sides and the evaluator is the
    plain factor. Finite-variation exponents with drift get the atom on the
    side the drift empties, and the opposite side's evaluator uses the
    drift-split representation with its rational prefactor.
    """
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    prof = model.profile
    fv_drift = prof.order < 1.0 and prof.drift != 0.0
    a_plus, a_minus = _atom_masses(model, q, tol=tol) if fv_drift else (0.0, 0.0)
    a = a_plus if side == "plus" else a_minus
    qr = complex(q).real if fv_drift else q

    if fv_drift and side == "plus" and prof.drift > 0.0:

        def evaluate(xi_targets, integration_contour=None, assume_separated=False):
            targets = np.asarray(xi_targets, dtype=complex)
            flat = np.atleast_1d(targets)
            contour = integration_contour or _drift_variant_contour(model, qr, True, tol)
            if not assume_separated:
                _require_below(flat, contour, "the drift-split supremum factor")
            out = _phi_fv_drift(model, qr, flat, contour, +1)
            return out if targets.ndim else complex(out[0])

        return 0.0, evaluate

    if fv_drift and side == "minus" and prof.drift < 0.0:

        def evaluate(xi_targets, integration_contour=None, assume_separated=False):
            targets = np.asarray(xi_targets, dtype=complex)
            flat = np.atleast_1d(targets)
            contour = integration_contour or _drift_variant_contour(model, qr, False, tol)
            if not assume_separated:
                _require_above(flat, contour, "the drift-split infimum factor")
            out = _phi_fv_drift(model, qr, flat, contour, -1)
            return out if targets.ndim else complex(out[0])

        return 0.0, evaluate

    if side == "plus":

        def evaluate(xi_targets, integration_contour=None, assume_separated=False):
            contour = integration_contour or select_params(prof, "eta_minus", tol)
            return (
                phi_plus(model, q, xi_targets, contour, assume_separated=assume_separated)
                - a
            )

        return a, evaluate

    def evaluate(xi_targets, integration_contour=None, assume_separated=False):
        contour = integration_contour or select_params(prof, "xi_plus", tol)
        return (
            phi_minus(model, q, xi_targets, contour, assume_separated=assume_separated)
            - a
        )

    return a, evaluate
