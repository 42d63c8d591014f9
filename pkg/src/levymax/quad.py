"""Contour-agnostic trapezoid quadrature with a-priori error budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "TrapezoidGrid",
    "ErrorBudget",
    "trapezoid_sum",
    "step_for_tolerance",
    "discretization_error",
    "hardy_norm_estimate",
    "truncation_for_tolerance",
    "sum_by_parts",
]

# Phase factors closer to 1 than this make the summation-by-parts
# denominator (e^{ia zeta} - 1)^n numerically meaningless.
_RESONANCE_FLOOR = 1e-8


@dataclass(frozen=True)
class TrapezoidGrid:
    """Uniform grid t_j = offset + j*zeta for j in [-n_neg, n_pos].

    Parameters
    ----------
    zeta : float
        Step size, > 0.
    n_neg, n_pos : int
        Half-counts; the grid has n_neg + n_pos + 1 nodes.
    offset : float
        Coordinate of node j = 0.
    """

    zeta: float
    n_neg: int
    n_pos: int
    offset: float = 0.0

    def __post_init__(self) -> None:
        if not (self.zeta > 0.0 and math.isfinite(self.zeta)):
            raise ValueError(f"zeta must be finite and > 0, got {self.zeta}")
        if self.n_neg < 0 or self.n_pos < 0:
            raise ValueError(
                f"half-counts must be >= 0, got n_neg={self.n_neg}, n_pos={self.n_pos}"
            )

    @property
    def size(self) -> int:
        return self.n_neg + self.n_pos + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        j = np.arange(-self.n_neg, self.n_pos + 1, dtype=float)
        return self.offset + self.zeta * j

    @classmethod
    def symmetric(cls, zeta: float, n: int, offset: float = 0.0) -> "TrapezoidGrid":
        return cls(zeta=zeta, n_neg=int(n), n_pos=int(n), offset=offset)


@dataclass(frozen=True)
class ErrorBudget:
    """Target tolerance plus the analyticity data of the integrand.

    d is the half-width of the strip around the integration line on which
    the integrand is analytic, hardy_norm_est an estimate of its combined
    L1 norm on the two strip boundaries.
    """

    tol: float
    d: float
    hardy_norm_est: float = 1.0

    def __post_init__(self) -> None:
        if not self.tol > 0.0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if not self.d > 0.0:
            raise ValueError(f"d must be > 0, got {self.d}")
        if not self.hardy_norm_est > 0.0:
            raise ValueError(
                f"hardy_norm_est must be > 0, got {self.hardy_norm_est}"
            )


def _evaluate_on_nodes(
    integrand: Callable, nodes: np.ndarray
) -> np.ndarray:
    try:
        vals = np.asarray(integrand(nodes), dtype=complex)
        if vals.shape != nodes.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.asarray([integrand(t) for t in nodes], dtype=complex)
    return vals


def trapezoid_sum(grid: TrapezoidGrid, integrand: Callable) -> complex:
    """zeta * sum of integrand over the grid nodes, ascending j.

    Parameters
    ----------
    grid : TrapezoidGrid
    integrand : callable
        Evaluated on the node array at once when possible, else per node.

    Returns
    -------
    complex
        The simplified trapezoid approximation of the line integral.
        Real and imaginary parts are accumulated with exact (fsum)
        summation in ascending node order for reproducibility.
    """
    nodes = grid.nodes
    vals = _evaluate_on_nodes(integrand, nodes)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise ValueError(
            f"non-finite integrand value {vals[j]} at node index "
            f"{j - grid.n_neg} (t={nodes[j]!r})"
        )
    re = math.fsum(vals.real.tolist())
    im = math.fsum(vals.imag.tolist())
    return grid.zeta * complex(re, im)


def discretization_error(zeta: float, d: float, hardy_norm: float) -> float:
    """Infinite-trapezoid discretization error bound H*r/(1-r), r=e^{-2 pi d/zeta}."""
    r = math.exp(-2.0 * math.pi * d / zeta)
    return hardy_norm * r / (1.0 - r)


def step_for_tolerance(budget: ErrorBudget) -> float:
    """Largest step zeta whose discretization error bound meets budget.tol.

    Inverts H*e^{-2 pi d/zeta}/(1 - e^{-2 pi d/zeta}) <= tol exactly:
    zeta = 2 pi d / ln(H/tol + 1).
    """
    return 2.0 * math.pi * budget.d / math.log(budget.hardy_norm_est / budget.tol + 1.0)


def hardy_norm_estimate(
    integrand: Callable,
    d: float,
    y_max: float,
    n_probe: int = 21,
) -> float:
    """Probe-based estimate of the strip-boundary norm H(g, d).

    Samples |g| at n_probe equispaced points on each boundary Im y = +-d,
    integrates the sampled envelope by the trapezoid rule and adds a
    geometric tail fitted to the outermost probes. Conservative for
    integrands that decay monotonically beyond the probed range.
    """
    if n_probe < 3:
        raise ValueError(f"n_probe must be >= 3, got {n_probe}")
    y = np.linspace(-y_max, y_max, n_probe)
    dy = y[1] - y[0]
    total = 0.0
    for side in (1.0, -1.0):
        vals = np.abs(_evaluate_on_nodes(integrand, y + 1j * side * d))
        core = float(np.sum(0.5 * (vals[:-1] + vals[1:])) * dy)
        tail = 0.0
        # Tail per end: geometric extrapolation from the last probe pair.
        for v_in, v_out in ((vals[1], vals[0]), (vals[-2], vals[-1])):
            if 0.0 < v_out < v_in:
                rate = math.log(v_in / v_out) / dy
                tail += v_out / rate
            else:
                tail += v_out * dy  # no visible decay, charge one extra cell
        total += core + tail
    return total


def truncation_for_tolerance(
    log_envelope: Callable[[float], float],
    tol: float,
    y_lo: float = 0.5,
    y_hi: float = 700.0,
) -> float:
    """Half-length Lambda with estimated envelope tail integral <= tol/2.

    log_envelope(y) must return ln of a positive, eventually decreasing
    majorant of |g| on y >= 0. The tail integral beyond y is estimated as
    envelope(y) / local decay rate; Lambda is located by bisection.

    Raises if the tolerance is unattainable inside (y_lo, y_hi).
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    log_target = math.log(0.5 * tol)
    h = 0.05

    def log_tail(y: float) -> float:
        le = log_envelope(y)
        rate = (le - log_envelope(y + h)) / h
        if rate <= 0.0:
            return math.inf  # not decreasing here, tail not controlled
        return le - math.log(rate)

    lo, hi = y_lo, y_lo
    while log_tail(hi) > log_target:
        lo = hi
        hi *= 2.0
        if hi > y_hi:
            raise ValueError(
                f"envelope tail never reaches tol={tol} below y={y_hi}"
            )
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if log_tail(mid) > log_target:
            lo = mid
        else:
            hi = mid
    return hi


def sum_by_parts(
    grid: TrapezoidGrid,
    a: float,
    g_values: Union[Sequence[complex], np.ndarray],
    n_iters: int = 1,
) -> complex:
    """Oscillatory sum zeta * sum_j e^{-i a t_j} g_j via summation by parts.

    Rewrites the sum as zeta/(e^{i a zeta}-1)^n * sum e^{-i a t_j} (D^n g)_j
    with D the forward difference, so a slowly decaying g can be truncated
    after its differences have decayed.

    Parameters
    ----------
    grid : TrapezoidGrid
        Nodes t_j at which the phase is evaluated, j in [-n_neg, n_pos].
    a : float
        Oscillation frequency; e^{i a zeta} must stay away from 1.
    g_values : sequence of complex
        Samples g_j for j in [-n_neg, n_pos + n_iters]; the n_iters extra
        right-edge samples make the forward differences formable.
    n_iters : int
        Number of summation-by-parts passes, >= 1.

    Returns
    -------
    complex
    """
    if n_iters < 1:
        raise ValueError(f"n_iters must be >= 1, got {n_iters}")
    phase_step = np.exp(1j * a * grid.zeta) - 1.0
    if abs(phase_step) < _RESONANCE_FLOOR:
        raise ValueError(
            f"resonant phase: |e^(i a zeta) - 1| = {abs(phase_step):.3e} "
            f"below floor {_RESONANCE_FLOOR} (a={a}, zeta={grid.zeta})"
        )
    g = np.asarray(g_values, dtype=complex)
    expected = grid.size + n_iters
    if g.shape != (expected,):
        raise ValueError(
            f"g_values must have length size+n_iters={expected}, got {g.shape}"
        )
    dg = g
    for _ in range(n_iters):
        dg = np.diff(dg)
    weighted = np.exp(-1j * a * grid.nodes) * dg
    re = math.fsum(weighted.real.tolist())
    im = math.fsum(weighted.imag.tolist())
    return grid.zeta / phase_step**n_iters * complex(re, im)
