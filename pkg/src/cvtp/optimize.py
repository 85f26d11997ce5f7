"""Maximization of the averaged fidelity over (theta, g_u, g_v).

The general solver is a bounded Nelder-Mead run from a fixed grid of starts,
followed by polishing restarts and a local perturbation check.  Where the
stationarity conditions can be solved by hand, the closed-form gains are
provided as well; they serve both as fast paths and as cross-checks.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as _opt

from .average import avg_fidelity_circle_sym, family_objective
from .cubic import real_cubic_roots
from .model import (
    HALF_PI,
    SQRT2,
    InputDistribution,
    ProtocolSettings,
    validate_squeezing,
)

THETA_EPS = 1e-6
GAIN_BOUND = 10.0
BOUNDS = ((THETA_EPS, HALF_PI - THETA_EPS), (-GAIN_BOUND, GAIN_BOUND), (-GAIN_BOUND, GAIN_BOUND))

START_THETAS = (math.pi / 8, math.pi / 4, 3 * math.pi / 8)
START_GAINS = (0.5, 1.0, SQRT2, 2.0)

PERTURBATION = 1e-3
IMPROVEMENT_TOL = 1e-9
FD_STEP = 1e-5
STATIONARITY_TOL = 1e-5

# Starts run to a moderate tolerance; only the winner is polished tightly.
_NM_START_OPTIONS = {"xatol": 1e-6, "fatol": 1e-12, "maxiter": 4000, "maxfev": 8000}
_NM_OPTIONS = {"xatol": 1e-10, "fatol": 1e-15, "maxiter": 6000, "maxfev": 12000}
_POLISH_ROUNDS = 6
_RESTART_BUDGET = 3

OBJECTIVES = ("closed-form", "tier2", "tier1")


class CubicFallbackWarning(RuntimeWarning):
    """The circle-gain cubic had no admissible root; a bounded 1-D search was used."""


@dataclass(frozen=True)
class OptimizationResult:
    settings: ProtocolSettings
    value: float
    baseline_one_param: float
    baseline_original: float
    stationarity_residual: float
    starts_tried: int
    converged: bool


# Closed-form sub-solvers

def optimal_gv_real(theta: float, r: float) -> float:
    """Momentum gain that maximizes the real-segment average for any R and g_u."""
    if not 0.0 < theta < HALF_PI:
        raise ValueError(f"theta must lie in (0, pi/2), got {theta!r}")
    r = validate_squeezing(r)
    den = math.cosh(r) ** 2 + math.cos(2.0 * theta) * math.sinh(r) ** 2
    assert den > 0.0
    return math.sinh(2.0 * r) * math.cos(theta) / den


def optimal_gu_imag(theta: float, r: float) -> float:
    """Position gain that maximizes the imaginary-segment average."""
    if not 0.0 < theta < HALF_PI:
        raise ValueError(f"theta must lie in (0, pi/2), got {theta!r}")
    r = validate_squeezing(r)
    den = math.cosh(r) ** 2 - math.cos(2.0 * theta) * math.sinh(r) ** 2
    assert den > 0.0
    return math.sinh(2.0 * r) * math.sin(theta) / den


def optimal_g_gaussian_centered(r: float, lam: float) -> float:
    """Symmetric gain for a Gaussian pool centred on the origin."""
    r = validate_squeezing(r)
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam!r}")
    return (2.0 * SQRT2 + lam * SQRT2 * math.sinh(2.0 * r)) / (2.0 + lam + lam * math.cosh(2.0 * r))


def circle_gain_cubic(r: float, R: float) -> tuple[float, float, float, float]:
    """Coefficients (a3, a2, a1, a0) of the stationarity cubic a3 g^3 + a2 g^2 + a1 g + a0."""
    er, ch, sh = math.exp(r), math.cosh(r), math.sinh(r)
    R2 = R * R
    a0 = SQRT2 * (er * math.sinh(2.0 * r) * ch + 2.0 * R2)
    a1 = -er * (3.0 * math.cosh(2.0 * r) - 1.0) * ch
    a2 = -SQRT2 * (R2 - 3.0 * er * sh * ch * ch)
    a3 = -er * ch ** 3
    return a3, a2, a1, a0


@dataclass(frozen=True)
class CircleGain:
    g: float
    value: float
    fallback: bool


def solve_circle_gain(r: float, R: float) -> CircleGain:
    """Best symmetric gain for the circle pool, with diagnostics."""
    r = validate_squeezing(r)
    if not R >= 0:
        raise ValueError(f"R must be >= 0, got {R!r}")
    roots = real_cubic_roots(*circle_gain_cubic(r, R))
    # g = 0 is the admissible root at r = R = 0; allow rounding just below it.
    candidates = [max(g, 0.0) for g in roots if g > -1e-12]
    if candidates:
        best = None
        for g in sorted(candidates):
            val = avg_fidelity_circle_sym(r, R, g)
            if best is None or val > best.value + 1e-15 * abs(val):
                best = CircleGain(g, val, False)
        return best
    warnings.warn(f"no non-negative root of the circle cubic at r={r}, R={R}; using bounded search",
                  CubicFallbackWarning, stacklevel=2)
    res = _opt.minimize_scalar(lambda g: -avg_fidelity_circle_sym(r, R, g), bounds=(0.0, GAIN_BOUND),
                               method="bounded", options={"xatol": 1e-12})
    return CircleGain(float(res.x), -float(res.fun), True)


def optimal_g_circle(r: float, R: float) -> float:
    """Symmetric gain maximizing the circle average (root of the stationarity cubic)."""
    return solve_circle_gain(r, R).g


# General maximizer

def _clip(p):
    return np.array([min(max(v, lo), hi) for v, (lo, hi) in zip(p, BOUNDS)])


def make_objective(family: InputDistribution, r: float,
                   objective: str = "closed-form") -> Callable[[float, float, float], float]:
    """F_av(theta, g_u, g_v) evaluated by the requested tier."""
    r = validate_squeezing(r)
    if objective == "closed-form":
        return family_objective(family, r)
    if objective in ("tier2", "oracle"):
        from .quadrature import quadrature_average

        return lambda t, gu, gv: quadrature_average(family, r, ProtocolSettings(t, gu, gv)).value
    if objective == "tier1":
        from .oracle import oracle_average_fidelity

        return lambda t, gu, gv: oracle_average_fidelity(family, r, ProtocolSettings(t, gu, gv)).value
    raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")


def stationarity_residual(func: Callable[[np.ndarray], float], p, free=(0, 1, 2), step=FD_STEP) -> float:
    """Max |dF/dp_i| by central differences over the free coordinates.

    At a box bound the difference is one-sided and only the component that
    points back into the box counts (a projected gradient).
    """
    p = np.asarray(p, dtype=float)
    worst = 0.0
    for i in free:
        lo, hi = BOUNDS[i]
        e = np.zeros_like(p)
        e[i] = step
        if p[i] - step < lo:
            d = (func(p + e) - func(p)) / step
            d = max(d, 0.0)
        elif p[i] + step > hi:
            d = (func(p) - func(p - e)) / step
            d = min(d, 0.0)
        else:
            d = (func(p + e) - func(p - e)) / (2.0 * step)
        worst = max(worst, abs(d))
    return worst


def _nelder_mead(neg, x0, options=_NM_OPTIONS):
    res = _opt.minimize(neg, x0, method="Nelder-Mead", bounds=BOUNDS, options=options)
    return _clip(res.x), -float(res.fun)


def _polish(neg, x, val):
    for _ in range(_POLISH_ROUNDS):
        x_new, v_new = _nelder_mead(neg, x)
        if v_new <= val + 1e-16:
            break
        x, val = x_new, v_new
    return x, val


def _perturbation_gain(f3, x, val):
    """Best point among the +-PERTURBATION neighbours if it beats val by IMPROVEMENT_TOL."""
    best = None
    for i, sign in itertools.product(range(3), (1.0, -1.0)):
        y = x.copy()
        y[i] += sign * PERTURBATION
        y = _clip(y)
        fy = f3(y)
        if fy > val + IMPROVEMENT_TOL and (best is None or fy > best[1]):
            best = (y, fy)
    return best


def _one_param_search(f: Callable[[float], float]):
    grid = np.linspace(-GAIN_BOUND, GAIN_BOUND, 401)
    vals = [f(g) for g in grid]
    k = int(np.argmax(vals))
    h = grid[1] - grid[0]
    lo, hi = max(-GAIN_BOUND, grid[k] - h), min(GAIN_BOUND, grid[k] + h)
    res = _opt.minimize_scalar(lambda g: -f(g), bounds=(lo, hi), method="bounded",
                               options={"xatol": 1e-12})
    g, v = float(res.x), -float(res.fun)
    if vals[k] > v:
        g, v = float(grid[k]), float(vals[k])
    return g, v


def _original_value(func) -> float:
    return func(0.25 * math.pi, SQRT2, SQRT2)


def maximize_one_param(family: InputDistribution, r: float,
                       objective: str = "closed-form") -> OptimizationResult:
    """Best symmetric protocol: theta = pi/4, g_u = g_v = g, g in [-10, 10].

    The reported stationarity residual is |dF/dg| along the symmetric line.
    """
    func = make_objective(family, r, objective)
    line = lambda g: func(0.25 * math.pi, g, g)
    g, v = _one_param_search(line)
    resid = stationarity_residual(lambda p: line(p[1]), np.array([0.25 * math.pi, g, g]), free=(1,))
    return OptimizationResult(
        settings=ProtocolSettings(0.25 * math.pi, g, g),
        value=v,
        baseline_one_param=v,
        baseline_original=_original_value(func),
        stationarity_residual=resid,
        starts_tried=1,
        converged=resid <= STATIONARITY_TOL * max(1.0, abs(v)),
    )


def default_starts() -> list[tuple[float, float, float]]:
    return [(t, gu, gv) for t in START_THETAS for gu in START_GAINS for gv in START_GAINS]


def maximize_three_param(family: InputDistribution, r: float, objective: str = "closed-form",
                         starts: Sequence[tuple[float, float, float]] | None = None) -> OptimizationResult:
    """Multi-start bounded Nelder-Mead over (theta, g_u, g_v).

    Starts run in a fixed order; the symmetric one-parameter optimum is
    appended as a final start so the result always dominates it.  The best
    point is polished by restarts and then probed by +-1e-3 perturbations;
    any improvement beyond 1e-9 triggers a restart from that neighbour.
    ``converged`` is False if that budget runs out or the projected
    finite-difference gradient exceeds 1e-5 * max(1, |F|).
    """
    func = make_objective(family, r, objective)
    f3 = lambda p: func(p[0], p[1], p[2])
    neg = lambda p: -f3(p)

    one = maximize_one_param(family, r, objective)
    start_list = list(default_starts() if starts is None else starts)
    g1 = one.settings.g_u
    start_list.append((0.25 * math.pi, g1, g1))

    best_x, best_v = None, -math.inf
    for s in start_list:
        x, v = _nelder_mead(neg, _clip(np.asarray(s, dtype=float)), _NM_START_OPTIONS)
        if v > best_v:  # strict: earlier starts win ties
            best_x, best_v = x, v

    best_x, best_v = _polish(neg, best_x, best_v)
    settled = False
    for _ in range(_RESTART_BUDGET + 1):
        better = _perturbation_gain(f3, best_x, best_v)
        if better is None:
            settled = True
            break
        best_x, best_v = _polish(neg, *better)

    resid = stationarity_residual(f3, best_x)
    converged = settled and resid <= STATIONARITY_TOL * max(1.0, abs(best_v))
    return OptimizationResult(
        settings=ProtocolSettings(*best_x),
        value=best_v,
        baseline_one_param=one.value,
        baseline_original=one.baseline_original,
        stationarity_residual=resid,
        starts_tried=len(start_list),
        converged=converged,
    )
