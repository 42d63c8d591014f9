"""Independent cross-checks: closed forms and Monte Carlo, no contour machinery."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .models import LevyModel

__all__ = [
    "OracleReport",
    "bm_joint_cdf",
    "bm_exchange_value",
    "flat_contour_atom",
    "flat_contour_cpdf_laplace",
    "flat_contour_level_cdf_laplace",
    "mc_joint_cdf",
    "mc_extremum_transform",
]

# Small-jump cutoff: jumps below this size are folded into the Gaussian part.
_JUMP_CUTOFF = 1e-3
_CHUNK_PATHS = 1 << 16
_BLOCK_ENTRIES = 1 << 24


@dataclass(frozen=True)
class OracleReport:
    """Value of one oracle evaluation with its own error estimate.

    est_error is a one-sigma-style bound (> 0); cost counts elementary
    operations (path-steps for Monte Carlo, integrand evaluations for
    quadrature oracles).
    """

    method: str
    value: float
    est_error: float
    cost: float


def bm_joint_cdf(sigma: float, mu_drift: float, T: float, a1: float, a2: float) -> float:
    """P(X_T <= a1, sup_{t<=T} X_t <= a2) for Brownian motion with drift.

    Reflection formula: Phi((a1 - mu T)/(sigma sqrt(T)))
    - exp(2 mu a2 / sigma^2) Phi((a1 - 2 a2 - mu T)/(sigma sqrt(T))).
    The second term is assembled in log space so large a2 with positive
    drift underflows cleanly instead of producing inf * 0.

    Parameters
    ----------
    sigma : float
        Volatility, > 0.
    mu_drift : float
        Drift rate.
    T : float
        Horizon, > 0.
    a1, a2 : float
        Terminal and supremum barriers; requires a1 <= a2 and a2 >= 0.
    """
    if not sigma > 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if not T > 0.0:
        raise ValueError(f"T must be > 0, got {T}")
    if a2 < 0.0:
        raise ValueError(f"a2 must be >= 0, got {a2}")
    if a1 > a2:
        raise ValueError(f"need a1 <= a2, got a1={a1} > a2={a2}")
    root = sigma * math.sqrt(T)
    term1 = norm.cdf((a1 - mu_drift * T) / root)
    log2 = 2.0 * mu_drift * a2 / (sigma * sigma) + norm.logcdf(
        (a1 - 2.0 * a2 - mu_drift * T) / root
    )
    value = term1 - math.exp(log2) if log2 > -745.0 else term1
    return float(min(1.0, max(0.0, value)))


def bm_exchange_value(sigma2: float, mu_drift: float, T: float, beta: float) -> float:
    """E[(exp(beta X_T) - exp(sup_{t<=T} X_t))_+] for Brownian motion with drift.

    The joint density of (X_T, sup X) under zero drift is the classical
    reflection kernel 2 (2m - x) / (sigma^3 T^{3/2} sqrt(2 pi))
    * exp(-(2m - x)^2 / (2 sigma^2 T)); drift enters through the Girsanov
    tilt exp(mu x / sigma^2 - mu^2 T / (2 sigma^2)), which depends on the
    terminal level only.  The payoff is positive exactly on
    {x > 0, m < beta x}, and the supremum integral over m reduces in
    closed form (substituting u = 2m - x and completing the square),
    leaving a single smooth integral over the terminal level x.

    Parameters
    ----------
    sigma2 : float
        Variance rate sigma^2, > 0.
    mu_drift : float
        Drift rate.
    T : float
        Horizon, > 0.
    beta : float
        Payoff exponent on the terminal level; requires beta > 1, else the
        payoff region is empty and the value is 0.
    """
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    if not T > 0.0:
        raise ValueError(f"T must be > 0, got {T}")
    if beta <= 1.0:
        return 0.0
    v = sigma2 * T
    rv = math.sqrt(v)
    pref = 1.0 / (v * rv * math.sqrt(2.0 * math.pi))
    tilt0 = -mu_drift * mu_drift * T / (2.0 * sigma2)
    gauss_pref = math.exp(v / 8.0)
    # beyond x_cut the tilted Gaussian envelope is below the underflow floor
    x_cut = 2.0 * v * (beta + abs(mu_drift) / sigma2 + 1.0) + 60.0 * rv

    def integrand(x: float) -> float:
        if x <= 0.0 or x >= x_cut:
            return 0.0
        hi = (2.0 * beta - 1.0) * x
        part_a = v * (math.exp(-x * x / (2.0 * v)) - math.exp(-hi * hi / (2.0 * v)))
        part_b = gauss_pref * (
            v
            * (
                math.exp(-((x - 0.5 * v) ** 2) / (2.0 * v))
                - math.exp(-((hi - 0.5 * v) ** 2) / (2.0 * v))
            )
            + 0.5 * v * math.sqrt(2.0 * math.pi * v)
            * (norm.cdf((hi - 0.5 * v) / rv) - norm.cdf((x - 0.5 * v) / rv))
        )
        weight = pref * math.exp(mu_drift * x / sigma2 + tilt0)
        return (math.exp(beta * x) * part_a - math.exp(0.5 * x) * part_b) * weight

    value, _ = quad(integrand, 0.0, x_cut, epsabs=1e-14, epsrel=1e-12, limit=400)
    return float(value)


def _side_small_variance(c: float, nu: float, beta: float, eps: float) -> float:
    # int_0^eps x^2 c e^{-beta x} x^{-nu-1} dx by the exponential series;
    # three terms are plenty at eps = 1e-3.
    total = 0.0
    for k in range(4):
        total += (-beta * eps) ** k / math.factorial(k) / (2.0 - nu + k)
    return c * eps ** (2.0 - nu) * total


# --------------------------------------------------------------------------
# Flat-contour Laplace-domain oracle.
#
# Everything below evaluates the same q-domain quantities as the deformed
# pipeline, but on straight horizontal lines with adaptive quadrature
# (QUADPACK via scipy) instead of sinh contours and trapezoid lattices.
# It imports nothing from the contour modules, so agreement between the two
# is a genuine cross-check of the analytics, not of shared plumbing.
# --------------------------------------------------------------------------

_QUAD_LIMIT = 400


def _complex_quad(f, lo, hi, *, epsabs, **kw):
    re = quad(lambda u: f(u).real, lo, hi, epsabs=epsabs, limit=_QUAD_LIMIT, **kw)
    im = quad(lambda u: f(u).imag, lo, hi, epsabs=epsabs, limit=_QUAD_LIMIT, **kw)
    return re[0] + 1j * im[0], re[1] + im[1]


def _osc_line_integral(g, level, c_osc, *, epsabs, split=40.0):
    """Integral of g along the horizontal line Im z = level.

    ``c_osc`` is the coefficient of the sole non-decaying oscillation
    exp(1j * c_osc * Re z) in g.  The central window is handled by plain
    adaptive quadrature; on each wing the phase is peeled off and the
    remainder integrated with the Fourier weight rule (which extrapolates
    over cycles), or with the infinite-interval rule when c_osc is zero.
    """
    total, err = _complex_quad(
        lambda u: g(u + 1j * level), -split, split, epsabs=epsabs
    )
    for sgn in (1.0, -1.0):
        if c_osc == 0.0:
            tail, terr = _complex_quad(
                lambda u: g(sgn * u + 1j * level), split, np.inf, epsabs=epsabs
            )
            total += tail
            err += terr
            continue
        w = c_osc * sgn
        flip = 1.0 if w >= 0.0 else -1.0
        wabs = abs(w)

        def smooth(u, s=sgn, ww=w):
            return g(s * u + 1j * level) * cmath.exp(-1j * ww * u)

        quads = {}
        for part_name, weight in (("re", "cos"), ("re_s", "sin"), ("im", "cos"), ("im_s", "sin")):
            pick = (lambda u: smooth(u).real) if part_name.startswith("re") else (
                lambda u: smooth(u).imag
            )
            val = quad(
                pick, split, np.inf, weight=weight, wvar=wabs,
                epsabs=epsabs, limit=_QUAD_LIMIT, limlst=80,
            )
            quads[part_name] = val[0]
            err += val[1]
        tail = complex(
            quads["re"] - flip * quads["im_s"],
            flip * quads["re_s"] + quads["im"],
        )
        total += tail
    return total, err


def _strip_lines(model: LevyModel) -> tuple[float, float]:
    mu_minus, mu_plus = model.profile.strip
    if not (mu_minus < 0.0 < mu_plus):
        raise ValueError(
            f"flat-contour oracle needs a two-sided strip, got ({mu_minus}, {mu_plus})"
        )
    return mu_minus, mu_plus


def _check_real_q(q) -> float:
    qc = complex(q)
    if qc.imag != 0.0 or qc.real <= 0.0:
        raise ValueError(f"flat-contour oracle needs real q > 0, got {q}")
    return qc.real


def flat_contour_atom(model: LevyModel, q: float, side: str) -> float:
    """Mass of the extremum atom at zero, by direct line quadrature.

    A finite-variation process with nonzero linear drift spends positive
    expected time before its supremum (drift down) or infimum (drift up)
    leaves zero, so the corresponding extremum at an exponential time has an
    atom at 0.  ``side`` selects the supremum ("plus") or infimum ("minus")
    atom; the result is 0.0 whenever no atom exists (order >= 1, zero
    drift, or drift pointing the wrong way).
    """
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    qr = _check_real_q(q)
    prof = model.profile
    mu = prof.drift
    if prof.order >= 1.0 or mu == 0.0:
        return 0.0
    if (side == "plus" and mu >= 0.0) or (side == "minus" and mu <= 0.0):
        return 0.0
    mu_minus, mu_plus = _strip_lines(model)
    level = 0.5 * (mu_minus if side == "plus" else mu_plus)

    def g(z: complex) -> complex:
        return np.log(1.0 + model.psi0(z) / (qr - 1j * mu * z)) / z

    sign = 1.0 if side == "plus" else -1.0
    val, _ = _osc_line_integral(g, level, 0.0, epsabs=1e-11)
    atom = cmath.exp(sign * val / (2.0j * math.pi))
    return float(atom.real)


def _panel_bank(
    model: LevyModel,
    q: float,
    line_im: float,
    core_half: float,
    *,
    step: float = 0.125,
    far: float = 1.0e9,
    ratio: float = 1.35,
    n_gauss: int = 10,
    max_nodes: int | None = None,
):
    """Reusable quadrature of the factorization symbol along one line.

    Returns nodes s on Im = line_im and the products w * ln(1 + psi(s)/q),
    so a Wiener-Hopf exponent at any target off the line is a single dot
    product against the Cauchy-type kernel.  The fine uniform core must
    cover every target abscissa (the kernel has a bump of width |target
    line - integration line| there); geometric panels then follow the
    symbol out to ``far``, which is what absorbs its logarithmic growth --
    plain truncation would need on the order of a billion uniform nodes
    for comparable accuracy.
    """
    core = np.arange(-core_half, core_half + 0.5 * step, step)
    hi = [float(core[-1])]
    while hi[-1] < far:
        hi.append(hi[-1] * ratio)
    hi = np.asarray(hi[1:])
    edges = np.concatenate((-hi[::-1], core, hi))
    if max_nodes is not None and (len(edges) - 1) * n_gauss > max_nodes:
        raise ValueError(
            f"factor quadrature would need {(len(edges) - 1) * n_gauss} nodes, "
            f"over the remaining big_N budget of {max_nodes}"
        )
    mids = 0.5 * (edges[1:] + edges[:-1])
    halfs = 0.5 * (edges[1:] - edges[:-1])
    gx, gw = np.polynomial.legendre.leggauss(n_gauss)
    u = (mids[:, None] + halfs[:, None] * gx[None, :]).ravel()
    w = (halfs[:, None] * gw[None, :]).ravel()
    s = u + 1j * line_im
    lgw = np.log(1.0 + np.asarray(model.psi(s)) / q) * w
    return s, lgw


def _factor_exponent(targets: np.ndarray, s: np.ndarray, lgw: np.ndarray) -> np.ndarray:
    """(1 / 2 pi i) * int lg(s) t / (s (t - s)) ds for a batch of targets."""
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    out = np.empty(len(targets), dtype=complex)
    rows = max(1, (1 << 22) // len(s))
    for lo in range(0, len(targets), rows):
        t = targets[lo : lo + rows, None]
        out[lo : lo + rows] = (lgw[None, :] * t / (s[None, :] * (t - s[None, :]))).sum(
            axis=1
        )
    return out / (2.0j * math.pi)


def _geometric_tail(last, prev, dx: float):
    """Continuation of a lattice sum past its last node.

    Models the summand beyond the edge as geometric with the measured
    complex ratio of the final two samples, which captures both the local
    algebraic decay and the phase rotation per step; disabled when the
    ratio is unstable (growing, or so close to 1 that the sum is not
    locally geometric).
    """
    r = np.asarray(last) / np.asarray(prev)
    ok = np.isfinite(r) & (np.abs(r) < 1.0) & (np.abs(1.0 - r) > 1e-4)
    safe = np.where(ok, 1.0 - r, 1.0)
    return np.where(ok, dx * np.asarray(last) * r / safe, 0.0)


def _powerlaw_tail(last: complex, far_mod: float, span: float, u_last: float, c_osc: float) -> complex:
    """Tail of a line integral past the lattice edge, by an explicit model.

    The integrand is modelled as last * (u / u_last)^(-p) * exp(1j * c_osc
    * (u - u_last)) with the decay exponent p fitted to the modulus drop
    ``far_mod`` over the trailing ``span``; the phase coefficient is known
    exactly, so the model integral (a Fourier-weight quadrature, or closed
    form without oscillation) resolves the slowly-converging oscillatory
    tail that a locally-geometric continuation gets wrong at the 1e-6
    level.
    """
    if not (np.isfinite(far_mod) and 0.0 < far_mod < 1.0) or abs(last) == 0.0:
        return 0.0j
    p = -math.log(far_mod) / math.log(u_last / (u_last - span))
    if c_osc == 0.0:
        if p <= 1.001:
            return 0.0j
        return last * u_last / (p - 1.0)

    def mod(u: float) -> float:
        return (u / u_last) ** (-p)

    wabs = abs(c_osc)
    # full_output also swallows the spurious bad-behavior flag QUADPACK
    # raises when epsabs sits at roundoff scale for the cycle sums; the
    # returned abserr stays at the 1e-11 level.
    ic = quad(
        mod, u_last, np.inf, weight="cos", wvar=wabs, epsabs=1e-12, limlst=80,
        full_output=1,
    )[0]
    is_ = quad(
        mod, u_last, np.inf, weight="sin", wvar=wabs, epsabs=1e-12, limlst=80,
        full_output=1,
    )[0]
    phase_int = ic + 1j * math.copysign(1.0, c_osc) * is_
    return last * cmath.exp(-1j * c_osc * u_last) * phase_int


def flat_contour_level_cdf_laplace(model: LevyModel, q: float, x1: float, a1: float) -> complex:
    """Laplace transform in the horizon of P(x1 + X_T <= a1), flat lines only.

    This is the supremum-free part of the joint transform: the indicator is
    written as a line integral over Im xi = mu_plus / 2 and the exponential
    time average turns the characteristic function into q / (q + psi), so
    the transform is the single integral of
    exp(1j (x1 - a1) xi) / (-1j xi (q + psi(xi))) over that line.
    """
    qr = _check_real_q(q)
    _, mu_plus = _strip_lines(model)
    level = 0.5 * mu_plus
    c_osc = x1 - a1

    def g(z: complex) -> complex:
        return cmath.exp(1j * c_osc * z) / (-1j * z * (qr + complex(model.psi(z))))

    val, _ = _osc_line_integral(g, level, c_osc, epsabs=1e-9)
    return val / (2.0 * math.pi)


def flat_contour_cpdf_laplace(
    model: LevyModel,
    q: float,
    x1: float,
    x2: float,
    a1: float,
    a2: float,
    *,
    big_N: int = 10**7,
    dx: float = 0.2,
    inner_reach: float = 600.0,
    outer_reach: float = 400.0,
) -> complex:
    """Joint-CDF Laplace transform on straight lines, independent of contours.

    Evaluates the transform in T of P(x1 + X_T <= a1, max(x2, sup x1 + X) <= a2)
    as the marginal term (see flat_contour_level_cdf_laplace) plus the
    supremum correction

        1 / ((2 pi)^2 q) * int deta exp(1j (x1 - a2) eta) phi_pp(eta) J(eta),
        J(eta) = int dxi exp(1j (a2 - a1) xi) phi_mm(xi) / (xi (xi - eta)),

    with eta on Im = mu_minus / 2 and xi on Im = mu_plus / 2.  Both factors
    come from panelized quadratures of the factorization symbol
    (_panel_bank); both line integrals are uniform lattices with
    measured-ratio geometric tail corrections.  Lattice discretization
    error decays like exp(-2 pi width / dx) where width is the distance
    from the lattice line to the nearest singularity, so the default step
    targets 1e-5 .. 1e-6 on strips of order one; tighten ``dx`` (and widen
    the reaches) for narrower strips.  ``inner_reach`` must exceed
    ``outer_reach`` by a healthy margin: the inner integrand for an outer
    node eta has a kernel peak at xi near eta, and a peak at or beyond the
    lattice edge is unrecoverable (the tail correction extrapolates
    through it).

    ``big_N`` caps the total node budget as a memory guard.  Requires real
    q > 0; returns 0 when x2 > a2 (the running maximum has already passed
    the barrier) and clamps a1 to a2 (the terminal level cannot exceed the
    overall supremum).
    """
    qr = _check_real_q(q)
    if x2 > a2:
        return 0.0 + 0.0j
    a1 = min(a1, a2)
    mu_minus, mu_plus = _strip_lines(model)
    if inner_reach < outer_reach + 100.0:
        raise ValueError(
            f"inner_reach={inner_reach} must exceed outer_reach={outer_reach} "
            "by at least 100"
        )

    n_in = 2 * int(round(inner_reach / dx)) + 1
    n_out = 2 * int(round(outer_reach / dx)) + 1
    budget = big_N - n_in - n_out
    if budget <= 0:
        raise ValueError(
            f"lattices alone need {n_in + n_out} nodes, over the big_N={big_N} guard"
        )

    free_term = flat_contour_level_cdf_laplace(model, qr, x1, a1)

    xi_nodes = (np.arange(n_in) - n_in // 2) * dx + 1j * (0.5 * mu_plus)
    eta_nodes = (np.arange(n_out) - n_out // 2) * dx + 1j * (0.5 * mu_minus)

    s_xi, lgw_xi = _panel_bank(
        model, qr, 0.75 * mu_plus, inner_reach + 40.0, max_nodes=budget
    )
    budget -= len(s_xi)
    s_eta, lgw_eta = _panel_bank(
        model, qr, 0.75 * mu_minus, outer_reach + 40.0, max_nodes=budget
    )
    phi_m = np.exp(-_factor_exponent(xi_nodes, s_xi, lgw_xi))
    phi_p = np.exp(_factor_exponent(eta_nodes, s_eta, lgw_eta))
    a_minus = flat_contour_atom(model, qr, "minus")
    a_plus = flat_contour_atom(model, qr, "plus")

    w_in = np.exp(1j * (a2 - a1) * xi_nodes) * (phi_m - a_minus) / xi_nodes
    j_vals = np.empty(n_out, dtype=complex)
    rows = max(1, (1 << 22) // n_in)
    for lo in range(0, n_out, rows):
        g = w_in[None, :] / (xi_nodes[None, :] - eta_nodes[lo : lo + rows, None])
        j_vals[lo : lo + rows] = (
            g.sum(axis=1) * dx
            + _geometric_tail(g[:, -1], g[:, -2], dx)
            + _geometric_tail(g[:, 0], g[:, 1], dx)
        )

    c_out = x1 - a2
    h = np.exp(1j * c_out * eta_nodes) * (phi_p - a_plus) * j_vals
    span = 8.0 * dx
    u_edge = (n_out // 2) * dx
    total = (
        h.sum() * dx
        + _powerlaw_tail(complex(h[-1]), abs(h[-1] / h[-9]), span, u_edge, c_out)
        + _powerlaw_tail(complex(h[0]), abs(h[0] / h[8]), span, u_edge, -c_out)
    )
    return free_term + complex(total) / (4.0 * math.pi**2 * qr)


@dataclass(frozen=True)
class _McParts:
    """Simulation decomposition: Gaussian floor, big-jump rates, drift."""

    sigma_small: float
    drift: float
    lam: tuple[float, float]
    nus: tuple[float, float]
    betas: tuple[float, float]


def _mc_parts(model: LevyModel) -> _McParts:
    kind = model.kind
    if kind == "brownian":
        return _McParts(
            sigma_small=math.sqrt(model.sigma2),
            drift=model.mean_rate(),
            lam=(0.0, 0.0),
            nus=(1.0, 1.0),
            betas=(1.0, 1.0),
        )
    if kind not in ("kobol-symmetric", "kobol-general"):
        raise ValueError(f"no Monte Carlo sampler for model kind {kind!r}")
    eps = _JUMP_CUTOFF
    sides = (
        (model.c_plus, model.nu_plus, -model.lambda_minus),
        (model.c_minus, model.nu_minus, model.lambda_plus),
    )
    var_small = 0.0
    lam = [0.0, 0.0]
    mean_big = 0.0
    for i, (c, nu, beta) in enumerate(sides):
        if c == 0.0:
            continue
        var_small += _side_small_variance(c, nu, beta, eps)
        dens = lambda x, c=c, nu=nu, beta=beta: c * x ** (-nu - 1.0) * math.exp(-beta * x)
        lam[i] = quad(dens, eps, np.inf)[0]
        m_side = quad(lambda x: x * dens(x), eps, np.inf)[0]
        mean_big += m_side if i == 0 else -m_side
    return _McParts(
        sigma_small=math.sqrt(var_small),
        drift=model.mean_rate() - mean_big,
        lam=(lam[0], lam[1]),
        nus=(model.nu_plus, model.nu_minus),
        betas=(sides[0][2], sides[1][2]),
    )


def _sample_magnitudes(rng, n: int, nu: float, beta: float) -> np.ndarray:
    # Pareto proposal eps * U^(-1/nu) thinned by exp(-beta (x - eps)).
    eps = _JUMP_CUTOFF
    out = np.empty(n)
    todo = np.arange(n)
    for _ in range(500):
        if todo.size == 0:
            return out
        x = eps * rng.random(todo.size) ** (-1.0 / nu)
        keep = rng.random(todo.size) < np.exp(-beta * (x - eps))
        out[todo[keep]] = x[keep]
        todo = todo[~keep]
    raise RuntimeError(
        f"jump rejection sampler stalled (nu={nu}, beta={beta}); "
        "acceptance rate is degenerate"
    )


def _simulate_extrema(model, T, n_paths, n_steps, rng, horizon_rate=None):
    """Endpoint, grid supremum and grid infimum for n_paths skeletons.

    With horizon_rate=q the extrema are recorded only up to an independent
    Exp(q) time per path (T then caps the horizon) and the endpoint is the
    path value at that time's grid cell.
    """
    parts = _mc_parts(model)
    n_steps = int(n_steps)
    dt = T / n_steps
    scale = parts.sigma_small * math.sqrt(dt)
    x_fin = np.empty(n_paths)
    run_max = np.empty(n_paths)
    run_min = np.empty(n_paths)
    block = max(1, min(n_steps, _BLOCK_ENTRIES // min(n_paths, _CHUNK_PATHS)))
    for lo in range(0, n_paths, _CHUNK_PATHS):
        hi = min(lo + _CHUNK_PATHS, n_paths)
        m = hi - lo
        # Pre-draw every big jump for the chunk: per-path counts over [0, T],
        # then a uniform step index and a rejection-sampled magnitude each.
        jump_steps = []
        jump_paths = []
        jump_sizes = []
        for side, sign in ((0, 1.0), (1, -1.0)):
            lam = parts.lam[side]
            if lam == 0.0:
                continue
            counts = rng.poisson(lam * T, size=m)
            total = int(counts.sum())
            if total == 0:
                continue
            jump_paths.append(np.repeat(np.arange(m), counts))
            jump_steps.append(rng.integers(0, n_steps, size=total))
            jump_sizes.append(
                sign * _sample_magnitudes(rng, total, parts.nus[side], parts.betas[side])
            )
        if jump_steps:
            jump_steps = np.concatenate(jump_steps)
            jump_paths = np.concatenate(jump_paths)
            jump_sizes = np.concatenate(jump_sizes)
        else:
            jump_steps = np.empty(0, dtype=int)
        if horizon_rate is not None:
            tau = np.minimum(rng.exponential(1.0 / horizon_rate, size=m), T)
        carry = np.zeros(m)
        cmax = np.zeros(m)
        cmin = np.zeros(m)
        fin = np.zeros(m)
        for k0 in range(0, n_steps, block):
            k1 = min(k0 + block, n_steps)
            incs = rng.standard_normal((m, k1 - k0)) * scale + parts.drift * dt
            sel = (jump_steps >= k0) & (jump_steps < k1)
            if sel.any():
                np.add.at(incs, (jump_paths[sel], jump_steps[sel] - k0), jump_sizes[sel])
            x = np.cumsum(incs, axis=1)
            x += carry[:, None]
            carry = x[:, -1].copy()
            if horizon_rate is None:
                cmax = np.maximum(cmax, x.max(axis=1))
                cmin = np.minimum(cmin, x.min(axis=1))
            else:
                t_grid = dt * np.arange(k0 + 1, k1 + 1)
                alive = t_grid[None, :] <= tau[:, None]
                cmax = np.maximum(cmax, np.where(alive, x, -np.inf).max(axis=1))
                cmin = np.minimum(cmin, np.where(alive, x, np.inf).min(axis=1))
                at_tau = alive.sum(axis=1) - 1
                fresh = at_tau >= 0
                fin[fresh] = x[fresh, at_tau[fresh]]
        x_fin[lo:hi] = carry if horizon_rate is None else fin
        run_max[lo:hi] = cmax
        run_min[lo:hi] = cmin
    return x_fin, run_max, run_min


def mc_joint_cdf(
    model: LevyModel,
    T: float,
    a1: float,
    a2: float,
    n_paths: int,
    n_steps: int = 10_000,
    seed: int = 0,
) -> OracleReport:
    """Monte Carlo estimate of P(X_T <= a1, sup_{t<=T} X_t <= a2).

    Paths are Euler skeletons: Gaussian part for jumps below the cutoff
    plus compound-Poisson big jumps, drift matched to the model's mean
    rate. The supremum is read off the grid points, which biases the
    estimate up by O(step size); est_error reports the one-sigma binomial
    half-width only.

    Parameters
    ----------
    model : LevyModel
    T, a1, a2 : float
        Horizon and barriers of the joint distribution function.
    n_paths, n_steps : int
        Simulation size; cost is the product.
    seed : int
        Master seed; chunks draw sequentially from one generator, so
        results are reproducible for a fixed (n_paths, n_steps, seed).
    """
    if not T > 0.0:
        raise ValueError(f"T must be > 0, got {T}")
    if a2 < 0.0:
        return OracleReport("mc-grid", 0.0, 1.0 / n_paths, 0.0)
    rng = np.random.default_rng(seed)
    x_fin, run_max, _ = _simulate_extrema(model, T, n_paths, n_steps, rng)
    hits = (x_fin <= a1) & (run_max <= a2)
    p = float(np.mean(hits))
    err = max(math.sqrt(p * (1.0 - p) / n_paths), 1.0 / n_paths)
    return OracleReport("mc-grid", p, err, float(n_paths) * float(n_steps))


def mc_extremum_transform(
    model: LevyModel,
    q: float,
    s_values,
    side: str = "min",
    n_paths: int = 100_000,
    n_steps: int = 2_000,
    seed: int = 0,
) -> list[OracleReport]:
    """Monte Carlo E[exp(s * extremum)] at an independent Exp(q) horizon.

    side="min" estimates the infimum transform at real s > 0 (the values
    the infimum factor takes at xi = -i s); side="max" the supremum
    transform at s < 0. One simulation is shared by all s_values. The
    horizon is truncated at the 1 - 1e-7 quantile of Exp(q).
    """
    if side not in ("min", "max"):
        raise ValueError(f"side must be 'min' or 'max', got {side!r}")
    if not q > 0.0:
        raise ValueError(f"q must be > 0, got {q}")
    s_arr = np.atleast_1d(np.asarray(s_values, dtype=float))
    if side == "min" and np.any(s_arr <= 0.0):
        raise ValueError("infimum transform needs s > 0 for a bounded integrand")
    if side == "max" and np.any(s_arr >= 0.0):
        raise ValueError("supremum transform needs s < 0 for a bounded integrand")
    t_cap = -math.log(1e-7) / q
    rng = np.random.default_rng(seed)
    _, run_max, run_min = _simulate_extrema(
        model, t_cap, n_paths, n_steps, rng, horizon_rate=q
    )
    ext = run_min if side == "min" else run_max
    cost = float(n_paths) * float(n_steps)
    out = []
    for s in s_arr:
        sample = np.exp(s * ext)
        value = float(np.mean(sample))
        err = float(np.std(sample) / math.sqrt(n_paths)) + 1.0 / n_paths
        out.append(OracleReport("mc-transform", value, err, cost))
    return out
