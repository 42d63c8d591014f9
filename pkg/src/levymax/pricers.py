"""Joint-law Laplace transforms built from factor tables, and the time-domain pricer."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .contours import SinhContour, select_params, validate_deformation
from .laplace import BromwichScheme, GwrScheme, invert_gwr, invert_sinh_bromwich
from .models import LevyModel
from .whf import (
    WhfTable,
    build_table,
    cross_kernel,
    decompose,
    phi_from_identity,
    phi_minus,
)

__all__ = [
    "LaplaceValue",
    "PayoffSpec",
    "LaplaceScheme",
    "PricingTask",
    "PricingResult",
    "cpdf_laplace",
    "no_touch_laplace",
    "barrier_laplace",
    "exchange_laplace",
    "laplace_value_general",
    "price",
    "cpdf_batch",
]

_TWO_PI = 2.0 * math.pi
_KINDS = ("cpdf", "no_touch", "barrier", "exchange", "general")
_HANDLE_KEYS = ("f_hat", "f_hat_partial", "w0_hat_partial")


@dataclass(frozen=True)
class LaplaceValue:
    """One Laplace-domain evaluation: the transform value at q and its addends.

    parts holds the three already-weighted contributions (single integral,
    atom term, double integral — unused slots are zero), so value is their
    sum. For real q > 0 the imaginary part of value is pure roundoff.
    """

    q: complex
    value: complex
    parts: tuple


@dataclass(frozen=True)
class PayoffSpec:
    """What to price: the payoff kind and its state/parameters.

    kind selects the transform: "cpdf" (joint distribution function of the
    terminal level and the running maximum, needs a1, a2), "no_touch"
    (survival below a2, needs a2), "barrier" (up-and-out payoff with
    transform g_hat, needs h; g_hat None means a constant payoff 1),
    "exchange" (pay the larger of the terminal exponential and beta-discounted
    running-maximum exponential, needs beta), or "general" (payoff given by
    transform handles, needs handles; see laplace_value_general). x1 is the
    starting log-level and x2 the starting running maximum, x1 <= x2.
    """

    kind: str
    x1: float = 0.0
    x2: float = 0.0
    a1: float = None
    a2: float = None
    h: float = None
    g_hat: Callable = None
    beta: float = None
    handles: Mapping = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown payoff kind {self.kind!r}; choose from {_KINDS}")
        if not self.x1 <= self.x2:
            raise ValueError(
                f"the running maximum cannot sit below the level: x1={self.x1} > x2={self.x2}"
            )
        need = {
            "cpdf": ("a1", "a2"),
            "no_touch": ("a2",),
            "barrier": ("h",),
            "exchange": ("beta",),
            "general": ("handles",),
        }[self.kind]
        for name in need:
            if getattr(self, name) is None:
                raise ValueError(f"payoff kind {self.kind!r} needs {name}")


@dataclass(frozen=True)
class LaplaceScheme:
    """How to get from the Laplace transform back to time T.

    method "sinh" samples q on a deformed Bromwich contour of the named
    family; "gwr" samples real q and accelerates the Gaver functionals.
    shift_a None lets the pricer pick the spectral shift automatically;
    contour_tol None derives the contour tolerance from the task tolerance.
    """

    method: str = "sinh"
    family: str = "bromwich-1"
    gwr_m: int = 8
    shift_a: float = None
    contour_tol: float = None

    def __post_init__(self) -> None:
        if self.method not in ("sinh", "gwr"):
            raise ValueError(f"method must be 'sinh' or 'gwr', got {self.method!r}")


@dataclass(frozen=True)
class PricingTask:
    """A payoff, a model, a horizon and a target tolerance."""

    model: LevyModel
    payoff: PayoffSpec
    T: float
    tol: float = 1e-7

    def __post_init__(self) -> None:
        if not self.T > 0.0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if not 0.0 < self.tol < 1.0:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")


@dataclass(frozen=True)
class PricingResult:
    """Time-domain value with stage timings and grid sizes for diagnostics."""

    value: float
    method: str
    timings: Mapping
    grid_sizes: Mapping


def _line_sum(contour: SinhContour, values: np.ndarray) -> complex:
    # (1/2 pi) * integral over the contour of a node-sampled integrand
    return contour.grid.zeta * complex(np.sum(values * contour.derivs)) / _TWO_PI


def _check_table(whf: WhfTable, q: complex) -> None:
    if complex(whf.q) != complex(q):
        raise ValueError(f"factor table was built at q={whf.q}, asked to price at q={q}")


def _capped_wings_down(profile, apex: float, hi_wall: float, tol: float,
                       decay_rate: float = 1.0) -> SinhContour:
    # Downward contour whose whole error strip stays below hi_wall (< 0),
    # not just below 0 as the role preset guarantees.
    probe = select_params(profile, "eta_minus", tol, apex=apex, decay_rate=decay_rate)
    w, d = probe.omega, probe.strip_halfwidth
    lo = profile.strip[0]
    s_hi = 1.0 if w + d >= math.pi / 2 else math.sin(w + d)
    s_lo = -1.0 if w - d <= -math.pi / 2 else math.sin(w - d)
    b = probe.b
    rise = s_hi - math.sin(w)
    if rise > 0.0:
        b = min(b, 0.85 * (hi_wall - apex) / rise)
    drop = math.sin(w) - s_lo
    if drop > 0.0:
        b = min(b, 0.85 * (apex - lo) / drop)
    return select_params(profile, "eta_minus", tol, apex=apex, b=b, decay_rate=decay_rate)


def _finite_or_die(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} returned non-finite values; check its analyticity strip")
    return values


# ---------------------------------------------------------------------------
# joint distribution of (level, running maximum)


def _cpdf_q_block(model, table, x1, x2, a1, a2, plus, minus, kernel, flat_pack):
    """Both addends of the joint-law transform for arrays of (a1, a2) points."""
    q = table.q
    a1 = np.minimum(np.asarray(a1, dtype=float), a2)
    a2 = np.asarray(a2, dtype=float)
    c = x1 - a1

    u = np.exp(1j * np.multiply.outer(minus.nodes, x1 - a2))
    u *= (table.plus_on_minus * minus.derivs)[:, None]
    pre = kernel @ u
    v = np.exp(1j * np.multiply.outer(plus.nodes, a2 - a1))
    v *= (table.minus_on_plus * plus.derivs / plus.nodes)[:, None]
    cc = plus.grid.zeta * minus.grid.zeta / (_TWO_PI * _TWO_PI)
    int2 = cc * np.einsum("jp,jp->p", v, pre)

    int1 = np.empty(len(c), dtype=complex)
    up = c > 0.0
    if np.any(up):
        w = plus.derivs / ((-1j * plus.nodes) * (q + table.psi_plus))
        phases = np.exp(1j * np.multiply.outer(plus.nodes, c[up]))
        int1[up] = plus.grid.zeta * (w @ phases) / _TWO_PI
    down = c < 0.0
    if np.any(down):
        w = minus.derivs / ((-1j * minus.nodes) * (q + table.psi_minus))
        phases = np.exp(1j * np.multiply.outer(minus.nodes, c[down]))
        int1[down] = 1.0 / q + minus.grid.zeta * (w @ phases) / _TWO_PI
    flat_mask = c == 0.0
    if np.any(flat_mask):
        flat, psi_flat = flat_pack
        w = flat.derivs / ((-1j * flat.nodes) * (q + psi_flat))
        int1[flat_mask] = flat.grid.zeta * np.sum(w) / _TWO_PI

    zero = x2 > a2
    int1[zero] = 0.0
    int2[zero] = 0.0
    return int1, int2


def cpdf_laplace(model, whf, q, x1, x2, a1, a2, plus, minus, *, kernel=None,
                 flat=None, tol=1e-12, check=True):
    """Laplace transform in maturity of P[level <= a1 and maximum <= a2].

    The state starts at level x1 below running maximum x2. The transform is
    the one-dimensional distribution integral plus a double integral coupling
    the two factors across the contour pair (plus, minus); a1 > a2 is clamped
    to a1 = a2 since the level never exceeds the maximum, and x2 > a2 gives
    the zero transform.

    Parameters
    ----------
    whf : WhfTable
        Factor table built at this q on the same (plus, minus) pair.
    kernel : ndarray, optional
        cross_kernel(plus, minus), reusable across q.
    flat : SinhContour, optional
        Flat contour for the boundary case x1 = a1; built on demand.

    Returns
    -------
    LaplaceValue
    """
    _check_table(whf, q)
    if not x1 <= x2:
        raise ValueError(f"state needs x1 <= x2, got x1={x1}, x2={x2}")
    if x2 > a2:
        return LaplaceValue(q=complex(q), value=0j, parts=(0j, 0j, 0j))
    if kernel is None:
        kernel = cross_kernel(plus, minus)
    flat_pack = None
    if x1 == min(a1, a2):
        if flat is None:
            flat = select_params(
                model.profile, "one_dim", tol,
                decay_rate=min(1.0, model.profile.order),
            )
            if check:
                validate_deformation(model, flat, [q]).raise_if_failed()
        flat_pack = (flat, np.asarray(model.psi(flat.nodes)))
    int1, int2 = _cpdf_q_block(
        model, whf, x1, x2, [a1], [a2], plus, minus, kernel, flat_pack
    )
    i1, i2 = complex(int1[0]), complex(int2[0]) / q
    return LaplaceValue(q=complex(q), value=i1 + i2, parts=(i1, i2, 0j))


# ---------------------------------------------------------------------------
# no-touch / barrier


@dataclass(frozen=True)
class _RidgeWorkspace:
    """Contour pack for the single-integral no-touch representation."""

    ridge: SinhContour
    psi_ridge: np.ndarray
    lift: SinhContour
    psi_lift: np.ndarray
    kernel: np.ndarray  # 1/(ridge_j - lift_k)


def _ridge_workspace(model, tol):
    prof = model.profile
    mu_plus = prof.strip[1]
    ridge = select_params(
        prof, "one_dim", tol, x_sign=-1, apex=0.25 * mu_plus,
        decay_rate=min(1.0, prof.order),
    )
    # The factor on the ridge comes from the opposite factor integrated over
    # a raised wings-up contour; raising it restores the vertical resolution
    # the default-height contour would lose against the nearby ridge apex.
    # The lift is built two decades tighter so its truncated reach covers
    # every ridge node it must serve.
    lift = select_params(prof, "xi_plus", max(1e-2 * tol, 1e-15), apex=0.75 * mu_plus)
    return _RidgeWorkspace(
        ridge=ridge,
        psi_ridge=np.asarray(model.psi(ridge.nodes)),
        lift=lift,
        psi_lift=np.asarray(model.psi(lift.nodes)),
        kernel=cross_kernel(ridge.nodes, lift),
    )


def no_touch_laplace(model, whf, q, x1, x2, a2, *, workspace=None, tol=1e-12,
                     check=True):
    """Laplace transform in maturity of P[the maximum stays at or below a2].

    Evaluated as a single integral of the supremum factor over a downward
    contour kept above zero (a quarter of the way to the strip top), where
    the phase of the integrand decays along both wings and the pole at the
    origin is never crossed. The factor values on that ridge come from the
    opposite factor on a raised wings-up contour through the continuation
    identity.
    """
    _check_table(whf, q)
    if not (x1 <= x2 <= a2):
        raise ValueError(f"no-touch state needs x1 <= x2 <= a2, got ({x1}, {x2}, {a2})")
    ws = workspace if workspace is not None else _ridge_workspace(model, tol)
    if check:
        validate_deformation(model, ws.ridge, [q]).raise_if_failed()
        validate_deformation(model, ws.lift, [q]).raise_if_failed()
    phi_m = phi_minus(
        model, q, ws.ridge.nodes, ws.lift,
        assume_separated=True, check=False,
        psi_values=ws.psi_lift, kernel=ws.kernel,
    )
    phi_p = phi_from_identity(model, q, phi_m, ws.psi_ridge)
    nodes = ws.ridge.nodes
    integrand = np.exp(1j * (x1 - a2) * nodes) * phi_p / (-1j * nodes)
    value = _line_sum(ws.ridge, integrand) / q
    return LaplaceValue(q=complex(q), value=value, parts=(value, 0j, 0j))


def barrier_laplace(model, whf, q, x, h, g_hat, plus, minus, *, kernel=None,
                    ridge_workspace=None, tol=1e-12, check=True):
    """Laplace transform of an up-and-out claim: pay G at maturity unless the
    maximum ever exceeds the barrier h.

    g_hat is the Fourier transform of the payoff G, sampled on the wings-up
    contour; a payoff supported at or below the barrier makes that integrand
    decay along both wings, since the combined phase carries exp(i(x-h)xi)
    at worst and x < h. g_hat None means the constant payoff 1, in which
    case the value is exactly the no-touch transform. The value is the
    unconstrained (European) term minus the knocked-out mass, a double
    integral over the contour pair.
    """
    _check_table(whf, q)
    if not x < h:
        raise ValueError(f"up-and-out start must sit below the barrier: x={x} >= h={h}")
    if g_hat is None:
        return no_touch_laplace(
            model, whf, q, x, x, h, workspace=ridge_workspace, tol=tol, check=check
        )
    if kernel is None:
        kernel = cross_kernel(plus, minus)
    g_plus = _finite_or_die(g_hat(plus.nodes), "payoff transform g_hat")

    term1 = _line_sum(
        plus, np.exp(1j * x * plus.nodes) * g_plus / (q + whf.psi_plus)
    )
    u = np.exp(1j * (x - h) * minus.nodes) * whf.plus_on_minus * minus.derivs
    v = np.exp(1j * h * plus.nodes) * whf.minus_on_plus * g_plus * plus.derivs
    cc = plus.grid.zeta * minus.grid.zeta / (_TWO_PI * _TWO_PI)
    term2 = -1j * cc * complex(v @ (kernel @ u)) / q
    return LaplaceValue(q=complex(q), value=term1 + term2, parts=(term1, term2, 0j))


# ---------------------------------------------------------------------------
# exchange with the running maximum


@dataclass(frozen=True)
class _ExchangeWorkspace:
    flat: SinhContour
    psi_flat: np.ndarray
    deep: SinhContour
    psi_deep: np.ndarray
    kernel: np.ndarray  # 1/(deep_k - flat_j)


def _exchange_workspace(model, beta, tol):
    prof = model.profile
    mu_minus, mu_plus = prof.strip
    rate = min(1.0, prof.order)
    flat = select_params(prof, "one_dim", tol, apex=0.35 * mu_plus, decay_rate=rate)
    deep = _capped_wings_down(prof, 0.5 * (mu_minus - beta), -beta, tol, decay_rate=rate)
    return _ExchangeWorkspace(
        flat=flat,
        psi_flat=np.asarray(model.psi(flat.nodes)),
        deep=deep,
        psi_deep=np.asarray(model.psi(deep.nodes)),
        kernel=cross_kernel(deep.nodes, flat),
    )


def exchange_laplace(model, whf, q, x1, x2, beta, plus, minus, *, workspace=None,
                     tol=1e-12, check=True):
    """Laplace transform in maturity of E[(exp(beta * level) - exp(maximum))+].

    The weight beta must exceed 1 and the analyticity strip must reach below
    -beta, because the maximum's factor is continued down to a contour lying
    beneath Im xi = -beta. The value combines a one-dimensional integral over
    a flat contour above zero, an atom term (finite-variation exponents with
    upward drift only), and a double integral coupling the deep and flat
    contours.

    Factor values on the workspace contours come from Cauchy integrals over
    the (plus, minus) pair, which are accurate only for targets within the
    pair's truncated reach: build the pair about two decades tighter than
    tol (the pricer does this automatically).
    """
    _check_table(whf, q)
    prof = model.profile
    mu_minus, mu_plus = prof.strip
    if not beta > 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    if not mu_minus < -beta:
        raise ValueError(
            f"exchange weight beta={beta} needs the lower strip bound below "
            f"{-beta}, got mu_minus={mu_minus}"
        )
    if not x1 <= x2:
        raise ValueError(f"state needs x1 <= x2, got x1={x1}, x2={x2}")
    ws = workspace if workspace is not None else _exchange_workspace(model, beta, tol)
    if check:
        validate_deformation(model, ws.flat, [q]).raise_if_failed()
        validate_deformation(model, ws.deep, [q]).raise_if_failed()

    fv_drift = prof.order < 1.0 and prof.drift != 0.0
    ic = None if fv_drift else plus
    a_m, eval_m = decompose(model, q, "minus", tol=tol)
    a_p = whf.a_plus
    phi_mm_flat = np.asarray(eval_m(ws.flat.nodes, ic))
    phi_m_deep = np.asarray(eval_m(ws.deep.nodes, ic)) + a_m
    phi_p_deep = phi_from_identity(model, q, phi_m_deep, ws.psi_deep)
    phi_pp_deep = phi_p_deep - a_p

    g = 1.0 - 1.0 / beta
    xf = ws.flat.nodes
    bracket1 = math.exp(beta * x2) / (beta - 1j * xf) + math.exp(x2) * (
        beta * (np.exp(1j * xf * g * x2) - 1.0) + 1j * xf
    ) / ((-1j * xf) * (beta - 1j * xf))
    i1 = _line_sum(ws.flat, np.exp(1j * (x1 - x2) * xf) * bracket1 / (q + ws.psi_flat))

    eta = ws.deep.nodes
    i2 = 0j
    if a_m != 0.0:
        i2 = a_m * math.exp(x2) * _line_sum(
            ws.deep,
            np.exp(1j * (x1 - x2) * eta) * phi_pp_deep / ((1j * eta) * (1.0 - 1j * eta)),
        )

    xi = xf[None, :]
    eta_c = eta[:, None]
    bracket3 = (
        math.exp(beta * x2) / (1j * eta_c - beta)
        + beta * np.exp((1.0 + 1j * xi * g) * x2) * (1.0 - 1j * xi / beta)
        / ((beta - 1j * xi) * (-1j * xi) * (1j * eta_c - 1.0 - 1j * xi * g))
        - math.exp(x2) * (1.0 - 1j * xi) / ((-1j * xi) * (1j * eta_c - 1.0))
    )
    wj = np.exp(-1j * x2 * xf) * phi_mm_flat * ws.flat.derivs
    inner = ws.flat.grid.zeta * ((-1j * ws.kernel * bracket3) @ wj) / _TWO_PI
    i3 = ws.deep.grid.zeta * complex(
        np.sum(np.exp(1j * (x1 - x2) * eta) * phi_pp_deep * inner * ws.deep.derivs)
    ) / _TWO_PI

    i2q, i3q = i2 / q, i3 / q
    return LaplaceValue(q=complex(q), value=i1 + i2q + i3q, parts=(i1, i2q, i3q))


# ---------------------------------------------------------------------------
# general payoffs of (level, running maximum)


def laplace_value_general(model, whf, q, x1, x2, handles, plus, minus, *,
                          mu_plus_prime=None, mu_minus_prime=None, tol=1e-12,
                          check=True):
    """Laplace transform of E[f(terminal level, running maximum)] from
    transform handles of the payoff.

    handles is a mapping with keys "f_hat" (full transform f_hat(xi1, xi2)
    over broadcastable arrays, analytic for Im xi1 above mu_plus_prime and
    Im xi2 below mu_minus_prime), "f_hat_partial" (transform in the first
    argument at a fixed second argument), and "w0_hat_partial" (transform of
    the along-diagonal increment w0(y, x2) = f(y, y) - f(y, x2) for y >= x2,
    in its first argument; None means w0 vanishes identically). A payoff
    that does not depend on its second argument is declared by f_hat=None,
    and only the one-dimensional term is computed.

    The second-argument integral is taken in closed form: f_hat is analytic
    below mu_minus_prime, so the only pole down there is the coupling pole,
    and pushing the contour down collapses the integral onto its residue.
    This requires exp(1j * x2 * xi2) * f_hat(xi1, xi2) -> 0 as
    Im xi2 -> -inf, which holds when every second-argument reference level
    of the payoff is at or above the current maximum x2.

    The optional key "ref1" may give the dominant first-argument reference
    level of the payoff (the a1 in transforms behaving like
    exp(-1j * a1 * xi1) times an algebraic factor). When x1 >= ref1, the
    first-argument contour is rotated so those oscillations decay along its
    wings instead of rattling a flat lattice; without the hint the contour
    stays flat and oscillatory payoffs lose accuracy at a rate set by the
    oscillation coefficient times the lattice step.

    Factor values on the interior contours come from Cauchy integrals over
    the (plus, minus) pair, accurate only within the pair's truncated
    reach: build the pair about two decades tighter than tol (the pricer
    does this automatically).
    """
    _check_table(whf, q)
    if not x1 <= x2:
        raise ValueError(f"state needs x1 <= x2, got x1={x1}, x2={x2}")
    missing = [k for k in ("f_hat", "f_hat_partial", "w0_hat_partial") if k not in handles]
    if missing:
        raise ValueError(f"handles is missing {missing}; expected keys {_HANDLE_KEYS}")
    prof = model.profile
    mu_minus, mu_plus = prof.strip
    mpp = 0.5 * mu_plus if mu_plus_prime is None else mu_plus_prime
    mmp = 0.5 * mu_minus if mu_minus_prime is None else mu_minus_prime
    if not 0.0 < mpp < mu_plus:
        raise ValueError(f"mu_plus_prime must lie in (0, {mu_plus}), got {mpp}")
    if not mu_minus < mmp < 0.0:
        raise ValueError(f"mu_minus_prime must lie in ({mu_minus}, 0), got {mmp}")

    rate = min(1.0, prof.order)
    ref1 = handles.get("ref1")
    c1_apex = 0.5 * (mpp + mu_plus)
    if ref1 is not None and x1 - float(ref1) >= 0.0:
        c1 = select_params(
            prof, "xi_plus", tol, apex=c1_apex,
            phase_gap=x1 - float(ref1), decay_rate=rate,
        )
    else:
        c1 = select_params(prof, "one_dim", tol, apex=c1_apex, decay_rate=rate)
    psi_c1 = np.asarray(model.psi(c1.nodes))
    if check:
        validate_deformation(model, c1, [q]).raise_if_failed()

    def call(name, *args):
        fn = handles[name]
        try:
            out = fn(*args)
        except Exception as exc:
            raise ValueError(f"payoff transform handle {name!r} failed: {exc}") from exc
        return _finite_or_die(out, f"payoff transform handle {name!r}")

    f1_c1 = call("f_hat_partial", c1.nodes, x2)
    term1 = _line_sum(c1, np.exp(1j * x1 * c1.nodes) * f1_c1 / (q + psi_c1))
    if handles["f_hat"] is None:
        return LaplaceValue(q=complex(q), value=term1, parts=(term1, 0j, 0j))

    deep = _capped_wings_down(
        prof, 0.5 * (mu_minus + mmp), mmp, tol, decay_rate=rate
    )
    psi_deep = np.asarray(model.psi(deep.nodes))
    if check:
        validate_deformation(model, deep, [q]).raise_if_failed()

    fv_drift = prof.order < 1.0 and prof.drift != 0.0
    ic_plus = None if fv_drift else plus
    ic_minus = None if fv_drift else minus
    a_m, eval_m = decompose(model, q, "minus", tol=tol)
    a_p, eval_p = decompose(model, q, "plus", tol=tol)
    phi_p_c1 = np.asarray(eval_p(c1.nodes, ic_minus)) + a_p
    phi_mm_c1 = phi_from_identity(model, q, phi_p_c1, psi_c1) - a_m
    phi_m_deep = np.asarray(eval_m(deep.nodes, ic_plus)) + a_m
    phi_pp_deep = phi_from_identity(model, q, phi_m_deep, psi_deep) - a_p

    term2 = 0j
    if a_m != 0.0 and handles["w0_hat_partial"] is not None:
        w0_deep = call("w0_hat_partial", deep.nodes, x2)
        term2 = a_m * _line_sum(
            deep, np.exp(1j * x1 * deep.nodes) * phi_pp_deep * w0_deep
        ) / q

    ck1 = cross_kernel(deep.nodes, c1)
    wvec = np.exp(1j * x2 * c1.nodes) * phi_mm_c1 * f1_c1 * c1.derivs
    inner1 = 1j * c1.grid.zeta * (ck1 @ wvec) / _TWO_PI

    # The second-argument contour is pushed down onto the coupling pole
    # xi2 = eta - xi1, so f_hat is sampled on the shifted diagonal; the
    # phases exp(1j * x2 * xi1) and exp(1j * x2 * (eta - xi1)) merge into a
    # single exp(1j * x2 * eta). Chunked over the deep contour to bound the
    # diagonal sample at ~4M complex entries.
    w1 = phi_mm_c1 * c1.derivs
    inner2 = np.empty(len(deep.nodes), dtype=complex)
    chunk = max(1, (1 << 22) // max(1, len(c1.nodes)))
    for lo in range(0, len(deep.nodes), chunk):
        sl = slice(lo, lo + chunk)
        shift = deep.nodes[sl, None] - c1.nodes[None, :]
        inner2[sl] = call("f_hat", c1.nodes[None, :], shift) @ w1
    inner2 *= c1.grid.zeta / _TWO_PI * np.exp(1j * x2 * deep.nodes)

    term3 = _line_sum(
        deep, np.exp(1j * (x1 - x2) * deep.nodes) * phi_pp_deep * (inner1 + inner2)
    ) / q
    return LaplaceValue(
        q=complex(q), value=term1 + term2 + term3, parts=(term1, term2, term3)
    )


# ---------------------------------------------------------------------------
# time-domain pricing


def _spectral_floor(model, probes) -> float:
    worst = 0.0
    for s in probes:
        worst = max(worst, -complex(model.psi(1j * s)).real)
    return 1.1 * worst


def _bromwich_setup(model, scheme, T, tol_c, floor):
    contour = select_params(
        model.profile, "bromwich", tol_c, family=scheme.family, T=T, sigma_floor=floor
    )
    return contour, [complex(qk) for qk in contour.nodes]


def _invert_from_cache(model, scheme, T, tol_c, cache_builder, extra_probes=()):
    """Sample the transform concurrently on the inverter's q set and invert.

    cache_builder(qs) must return a mapping from complex(q) to the transform
    value at q; the per-q work runs in a thread pool because the heavy steps
    are numpy reductions.
    """
    mu_minus, mu_plus = model.profile.strip
    floor = _spectral_floor(model, [0.5 * mu_minus, 0.5 * mu_plus, *extra_probes])
    if scheme.method == "gwr":
        shift = scheme.shift_a
        if shift is None:
            shift = max(0.0, floor - math.log(2.0) / T)
        g = GwrScheme(T=T, M=scheme.gwr_m, shift_a=shift)
        ln2t = math.log(2.0) / T
        qs = [k * ln2t + shift for k in range(1, 2 * g.M + 1)]
        cache = cache_builder(qs)
        return g, qs, cache, lambda f: invert_gwr(g, f)
    contour, qs = _bromwich_setup(model, scheme, T, tol_c, floor)
    cache = cache_builder(qs)
    b = BromwichScheme(contour=contour)
    return b, qs, cache, lambda f: invert_sinh_bromwich(b, f, T=T)


def _concurrent_cache(qs, block):
    with ThreadPoolExecutor(max_workers=min(len(qs), 16)) as pool:
        values = list(pool.map(block, qs))
    return dict(zip((complex(qk) for qk in qs), values))


def price(task: PricingTask, scheme: LaplaceScheme = None) -> PricingResult:
    """Time-domain value of a payoff at horizon T.

    Builds the contour pair and per-q factor tables once, evaluates the
    payoff's Laplace transform concurrently over the inverter's q samples,
    and inverts. Finite-variation exponents with drift only admit the real-q
    ("gwr") method; asking for "sinh" raises DeformationError.

    Returns a PricingResult with the value, stage timings in seconds, and
    the grid sizes used.
    """
    scheme = LaplaceScheme() if scheme is None else scheme
    model, payoff, T = task.model, task.payoff, task.T
    tol_c = scheme.contour_tol
    if tol_c is None:
        tol_c = min(max(1e-3 * task.tol, 1e-13), 1e-8)
    # The factor contours are built two decades tighter than the payoff
    # contours: Cauchy evaluation of a factor is only accurate for targets
    # inside the integration contour's truncated reach, so the factor pair
    # must extend past every payoff-side node.
    tol_t = max(1e-2 * tol_c, 1e-15)
    prof = model.profile
    mu_minus, mu_plus = prof.strip

    t0 = time.perf_counter()
    plus = select_params(prof, "xi_plus", tol_t)
    minus = select_params(prof, "eta_minus", tol_t)
    kernel = cross_kernel(plus, minus)
    psi_p = np.asarray(model.psi(plus.nodes))
    psi_m = np.asarray(model.psi(minus.nodes))

    extra_probes = []
    flat = None
    ridge_ws = None
    exchange_ws = None
    rate = min(1.0, prof.order)
    if payoff.kind == "cpdf":
        flat = select_params(prof, "one_dim", tol_c, decay_rate=rate)
    if payoff.kind == "no_touch" or (payoff.kind == "barrier" and payoff.g_hat is None):
        ridge_ws = _ridge_workspace(model, tol_c)
    if payoff.kind == "exchange":
        exchange_ws = _exchange_workspace(model, payoff.beta, tol_c)
        extra_probes.append(exchange_ws.deep.apex)

    def block_value(q):
        table = build_table(
            model, q, plus, minus,
            psi_plus_values=psi_p, psi_minus_values=psi_m, kernel=kernel, check=False,
        )
        if payoff.kind == "cpdf":
            out = cpdf_laplace(
                model, table, q, payoff.x1, payoff.x2, payoff.a1, payoff.a2,
                plus, minus, kernel=kernel, flat=flat, tol=tol_c, check=False,
            )
        elif payoff.kind == "no_touch":
            out = no_touch_laplace(
                model, table, q, payoff.x1, payoff.x2, payoff.a2,
                workspace=ridge_ws, tol=tol_c, check=False,
            )
        elif payoff.kind == "barrier":
            out = barrier_laplace(
                model, table, q, payoff.x1, payoff.h, payoff.g_hat, plus, minus,
                kernel=kernel, ridge_workspace=ridge_ws, tol=tol_c, check=False,
            )
        elif payoff.kind == "exchange":
            out = exchange_laplace(
                model, table, q, payoff.x1, payoff.x2, payoff.beta, plus, minus,
                workspace=exchange_ws, tol=tol_c, check=False,
            )
        else:
            out = laplace_value_general(
                model, table, q, payoff.x1, payoff.x2, payoff.handles, plus, minus,
                tol=tol_c, check=False,
            )
        return out.value

    def cache_builder(qs):
        for contour in filter(None, [plus, minus, flat]):
            validate_deformation(model, contour, qs).raise_if_failed()
        if ridge_ws is not None:
            validate_deformation(model, ridge_ws.ridge, qs).raise_if_failed()
            validate_deformation(model, ridge_ws.lift, qs).raise_if_failed()
        if exchange_ws is not None:
            validate_deformation(model, exchange_ws.flat, qs).raise_if_failed()
            validate_deformation(model, exchange_ws.deep, qs).raise_if_failed()
        if scheme.method == "gwr":
            return _concurrent_cache(qs, lambda q: complex(block_value(q)).real)
        return _concurrent_cache(qs, block_value)

    t1 = time.perf_counter()
    _, qs, cache, invert = _invert_from_cache(
        model, scheme, T, tol_c, cache_builder, extra_probes
    )
    t2 = time.perf_counter()
    value = invert(lambda q: cache[complex(q)])
    t3 = time.perf_counter()
    sizes = {"plus": len(plus.nodes), "minus": len(minus.nodes), "laplace": len(qs)}
    timings = {"setup": t1 - t0, "transforms": t2 - t1, "inversion": t3 - t2}
    return PricingResult(
        value=float(value), method=scheme.method, timings=timings, grid_sizes=sizes
    )


def cpdf_batch(model, T, points, *, x1=0.0, x2=0.0, tol=1e-7,
               scheme: LaplaceScheme = None) -> np.ndarray:
    """Joint-law values P[level <= a1, maximum <= a2] for many (a1, a2) at once.

    points is an array of shape (P, 2) with columns (a1, a2). Contours, psi
    arrays, the coupling kernel and the per-q factor tables are all shared
    across the batch, so the marginal cost per point is two small matrix
    products per q. Result ordering follows the input ordering.
    """
    scheme = LaplaceScheme() if scheme is None else scheme
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must have shape (P, 2), got {pts.shape}")
    if not x1 <= x2:
        raise ValueError(f"state needs x1 <= x2, got x1={x1}, x2={x2}")
    tol_c = scheme.contour_tol
    if tol_c is None:
        tol_c = min(max(1e-3 * tol, 1e-13), 1e-8)
    tol_t = max(1e-2 * tol_c, 1e-15)
    prof = model.profile
    plus = select_params(prof, "xi_plus", tol_t)
    minus = select_params(prof, "eta_minus", tol_t)
    kernel = cross_kernel(plus, minus)
    psi_p = np.asarray(model.psi(plus.nodes))
    psi_m = np.asarray(model.psi(minus.nodes))
    a1, a2 = pts[:, 0], pts[:, 1]
    flat_pack = None
    if np.any(x1 == np.minimum(a1, a2)):
        flat = select_params(
            prof, "one_dim", tol_c, decay_rate=min(1.0, prof.order)
        )
        flat_pack = (flat, np.asarray(model.psi(flat.nodes)))

    def block(q):
        table = build_table(
            model, q, plus, minus,
            psi_plus_values=psi_p, psi_minus_values=psi_m, kernel=kernel, check=False,
        )
        int1, int2 = _cpdf_q_block(
            model, table, x1, x2, a1, a2, plus, minus, kernel, flat_pack
        )
        out = int1 + int2 / q
        return out.real if scheme.method == "gwr" else out

    def cache_builder(qs):
        for contour in (plus, minus):
            validate_deformation(model, contour, qs).raise_if_failed()
        if flat_pack is not None:
            validate_deformation(model, flat_pack[0], qs).raise_if_failed()
        return _concurrent_cache(qs, block)

    _, qs, cache, invert = _invert_from_cache(model, scheme, T, tol_c, cache_builder)
    values = np.empty(len(pts), dtype=float)
    for p in range(len(pts)):
        values[p] = invert(lambda q: cache[complex(q)][p])
    return values
