"""Brute-force simulation of the teleportation protocol on position wavefunctions.

Nothing here uses the closed-form fidelity.  The input coherent state and the
two-mode squeezed channel are sampled as position-space wavefunctions, the
beam splitter is a change of integration variables, Alice's homodyne
projections and Bob's displacement act on those samples, and every integral
is a trapezoid sum.

Integration windows come from the Gaussian envelope of each integrand: the
modulus of every integrand here is exp(-Q(z)) with Q a positive quadratic
form, so its centre and widths are known before sampling.  Windows span
several envelope widths and node spacings are set so the trapezoid aliasing
error lies below double-precision round-off.  Each quantity is computed
twice on nested grids and must agree to REFINEMENT_TOL.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.polynomial.hermite import hermgauss

from .model import (
    QUADRATURES,
    AmplitudeLike,
    Circumference,
    Disk,
    Gaussian,
    ImagLine,
    InputDistribution,
    MeasurementOutcome,
    ProtocolSettings,
    RealLine,
    as_amplitude,
)

REFINEMENT_TOL = 1e-10
_RATE = QUADRATURES.fourier_rate  # <x|p> = exp(2ipx)/sqrt(pi)
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


class OracleConvergenceError(RuntimeError):
    """Two successive grid refinements disagreed by more than REFINEMENT_TOL."""


@dataclass(frozen=True)
class WavefunctionGrid:
    """Samples of a wavefunction on a uniform window [center - halfwidth, center + halfwidth]."""

    nodes: np.ndarray
    amplitudes: np.ndarray
    halfwidth: float

    @classmethod
    def sample(cls, func, center: float, halfwidth: float, n: int) -> "WavefunctionGrid":
        nodes = np.linspace(center - halfwidth, center + halfwidth, n)
        return cls(nodes, np.asarray(func(nodes), dtype=complex), halfwidth)

    @property
    def step(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.step)

    def mean_position(self) -> float:
        return float(np.sum(self.nodes * np.abs(self.amplitudes) ** 2) * self.step)


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    error: float


def coherent_wavefunction(alpha: AmplitudeLike, x):
    """<x|alpha> = (2/pi)^{1/4} exp(-x^2 + 2 alpha x - |alpha|^2/2 - alpha^2/2)."""
    a = complex(as_amplitude(alpha))
    x = np.asarray(x, dtype=float)
    return (2.0 / math.pi) ** 0.25 * np.exp(-x * x + 2.0 * a * x - 0.5 * abs(a) ** 2 - 0.5 * a * a)


def tmsv_wavefunction(r: float, x2, x3):
    """Two-mode squeezed vacuum: sqrt(2/pi) exp[-e^{-2r}(x2+x3)^2/2 - e^{2r}(x2-x3)^2/2]."""
    x2 = np.asarray(x2, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    return math.sqrt(2.0 / math.pi) * np.exp(
        -0.5 * math.exp(-2.0 * r) * (x2 + x3) ** 2 - 0.5 * math.exp(2.0 * r) * (x2 - x3) ** 2)


# Envelope bookkeeping: |integrand| = exp(-sum_k w_k (l_k . z + m_k)^2).

def _frame(terms):
    """Centre, Hessian H and envelope covariance S = (2H)^-1 of exp(-sum w (l.z + m)^2)."""
    dim = len(terms[0][1])
    H = np.zeros((dim, dim))
    lin = np.zeros(dim)
    for w, l, m in terms:
        l = np.asarray(l, dtype=float)
        H += w * np.outer(l, l)
        lin += w * m * l
    center = -np.linalg.solve(H, lin)
    return center, H, np.linalg.inv(2.0 * H)


def _trapezoid_step(sigma: float, freq: float, scale: float) -> float:
    # Aliasing of exp(-(t/sigma)^2/2) e^{i freq t} at 2pi/h is exp(-sigma^2 (2pi/h - freq)^2 / 2).
    return scale * 2.0 * math.pi / (abs(freq) + 8.5 / sigma)


def _offsets(sigma: float, step: float, reach: float) -> np.ndarray:
    n = int(math.ceil(reach * sigma / step))
    return step * np.arange(-n, n + 1)


def _refined(compute, tol=REFINEMENT_TOL):
    """Run ``compute(level)`` on two nested grids; one extra level if they disagree."""
    coarse = compute(0)
    fine = compute(1)
    if np.all(np.abs(fine - coarse) <= tol):
        return fine, float(np.max(np.abs(fine - coarse)))
    finer = compute(2)
    diff = float(np.max(np.abs(finer - fine)))
    if diff > tol:
        raise OracleConvergenceError(f"grid refinements disagree by {diff:.3e}")
    return finer, diff


_LEVELS = ((1.0, 9.0), (0.7, 10.0), (0.5, 11.0))  # (step scale, window reach in sigmas)


# Post-measurement state and Bob's displaced state, pointwise in x3.

def _psi_prime(a: complex, r: float, theta: float, p: float, xu: float, x3, level: int):
    s, c = math.sin(theta), math.cos(theta)
    em, ep = 0.5 * math.exp(-2.0 * r), 0.5 * math.exp(2.0 * r)
    x3 = np.atleast_1d(np.asarray(x3, dtype=float))
    # Envelope in x_v: phi(x_v s + xu c) and Phi(x_v c - xu s, x3).
    H = s * s + (em + ep) * c * c
    sigma = math.sqrt(1.0 / (2.0 * H))
    centers = (s * (a.real - c * xu) + em * c * (s * xu - x3) + ep * c * (s * xu + x3)) / H
    freq = 2.0 * a.imag * s - _RATE * p
    scale, reach = _LEVELS[level]
    h = _trapezoid_step(sigma, freq, scale)
    xv = centers[:, None] + _offsets(sigma, h, reach)[None, :]
    vals = (coherent_wavefunction(a, xv * s + xu * c)
            * tmsv_wavefunction(r, xv * c - xu * s, x3[:, None])
            * np.exp(-1j * _RATE * xv * p))
    return _INV_SQRT_PI * h * vals.sum(axis=1)


def post_measurement_amplitude(alpha: AmplitudeLike, r: float, theta: float,
                               outcome: MeasurementOutcome, x3):
    """Psi'(p_v, x_u, x3): joint amplitude of Alice's outcome and Bob's position x3.

    Equals (1/sqrt(pi)) int dx_v phi(x_v sin + x_u cos) Phi(x_v cos - x_u sin, x3) e^{-2i x_v p_v}.
    """
    if not 0.0 < theta < 0.5 * math.pi:
        raise ValueError("theta must lie in (0, pi/2)")
    a = complex(as_amplitude(alpha))
    val, _ = _refined(lambda lvl: _psi_prime(a, r, theta, outcome.p_v, outcome.x_u, x3, lvl))
    return val if np.ndim(x3) else complex(val[0])


def teleported_wavefunction(alpha: AmplitudeLike, r: float, s: ProtocolSettings,
                            outcome: MeasurementOutcome, x3):
    """Bob's state after displacing by (g_u x_u, g_v p_v), global phase dropped.

    Not normalized: its squared norm is the outcome probability, so divide by
    sqrt(outcome_probability(...)) for the conditional state.
    """
    x3 = np.asarray(x3, dtype=float)
    shifted = post_measurement_amplitude(alpha, r, s.theta, outcome, x3 - s.g_u * outcome.x_u)
    return shifted * np.exp(1j * _RATE * s.g_v * outcome.p_v * x3)


def _x3_window(a: complex, r: float, theta: float, p: float, xu: float, shift: float,
               with_input: bool):
    """Envelope (centre, sigma) in x3 of Psi'(x3 - shift), optionally times phi_alpha(x3)."""
    s, c = math.sin(theta), math.cos(theta)
    em, ep = 0.5 * math.exp(-2.0 * r), 0.5 * math.exp(2.0 * r)
    # z = (x_v, x3); Phi argument x3 - shift.
    terms = [
        (1.0, (s, 0.0), c * xu - a.real),
        (em, (c, 1.0), -s * xu - shift),
        (ep, (c, -1.0), -s * xu + shift),
    ]
    if with_input:
        terms.append((1.0, (0.0, 1.0), -a.real))
    center, H, S = _frame(terms)
    # |.|^2 of the x_v-integrated amplitude has variance S33/2 in x3.
    return center[1], math.sqrt(S[1, 1])


def outcome_probability(alpha: AmplitudeLike, r: float, theta: float,
                        outcome: MeasurementOutcome) -> float:
    """p(p_v, x_u) = int dx3 |Psi'(p_v, x_u, x3)|^2."""
    a = complex(as_amplitude(alpha))
    center, sigma = _x3_window(a, r, theta, outcome.p_v, outcome.x_u, 0.0, False)

    def compute(level):
        scale, reach = _LEVELS[level]
        h = 0.4 * scale * sigma
        x3 = center + _offsets(sigma, h, reach - 2.0)
        amp = _psi_prime(a, r, theta, outcome.p_v, outcome.x_u, x3, level)
        return np.array(h * np.sum(np.abs(amp) ** 2))

    val, _ = _refined(compute)
    return float(val)


def outcome_fidelity(alpha: AmplitudeLike, r: float, s: ProtocolSettings,
                     outcome: MeasurementOutcome) -> float:
    """|<alpha|chi>|^2 / p(outcome): fidelity conditioned on one measurement result."""
    a = complex(as_amplitude(alpha))
    shift = s.g_u * outcome.x_u
    center, sigma = _x3_window(a, r, s.theta, outcome.p_v, outcome.x_u, shift, True)
    # Phase rate in x3: input conjugate, Bob's momentum kick, and the x_v phase
    # carried through the x3-dependent centre of the x_v integral.
    sn, cs = math.sin(s.theta), math.cos(s.theta)
    em, ep = 0.5 * math.exp(-2.0 * r), 0.5 * math.exp(2.0 * r)
    drift = cs * (ep - em) / (sn * sn + (em + ep) * cs * cs)
    freq = (abs(_RATE * a.imag) + abs(_RATE * s.g_v * outcome.p_v)
            + abs(_RATE * (a.imag * sn - outcome.p_v) * drift))

    def compute(level):
        scale, reach = _LEVELS[level]
        h = _trapezoid_step(sigma, freq, 0.8 * scale)
        x3 = center + _offsets(sigma, h, reach)
        chi = (_psi_prime(a, r, s.theta, outcome.p_v, outcome.x_u, x3 - shift, level)
               * np.exp(1j * _RATE * s.g_v * outcome.p_v * x3))
        return np.array(h * np.sum(np.conj(coherent_wavefunction(a, x3)) * chi))

    overlap, _ = _refined(compute)
    return float(abs(complex(overlap)) ** 2 / outcome_probability(a, r, s.theta, outcome))


# Full outcome-averaged fidelity.

class _FidelityFrame:
    """Envelope of phi*(x3) phi(x_v s + x_u c) Phi(x_v c - x_u s, x3 - g_u x_u) in z = (x_u, y, x3).

    y = x_v - g_v x3, so Alice's momentum outcome only enters via exp(-2i p y).
    """

    def __init__(self, a: complex, r: float, st: ProtocolSettings):
        s, c = math.sin(st.theta), math.cos(st.theta)
        gu, gv = st.g_u, st.g_v
        em, ep = 0.5 * math.exp(-2.0 * r), 0.5 * math.exp(2.0 * r)
        terms = [
            (1.0, (0.0, 0.0, 1.0), -a.real),
            (1.0, (c, s, s * gv), -a.real),
            (em, (-s - gu, c, c * gv + 1.0), 0.0),
            (ep, (-s + gu, c, c * gv - 1.0), 0.0),
        ]
        self.center, self.H, self.S = _frame(terms)
        # Linear phase coefficients of the integrand (constant phases dropped).
        b = a.imag
        self.k = np.array([2.0 * b * c, 2.0 * b * s, 2.0 * b * s * gv - 2.0 * b])
        S = self.S
        self.sigma_x = math.sqrt(S[0, 0])
        self.sigma_y = math.sqrt(S[1, 1] - S[0, 1] ** 2 / S[0, 0])  # y given x_u
        self.slope_y = S[0, 1] / S[0, 0]
        self.sigma_3 = math.sqrt(1.0 / (2.0 * self.H[2, 2]))  # x3 given (x_u, y)
        # After the x3 integral the y-phase rate is k_y - k_3 H_32/H_33.
        self.kappa_y = self.k[1] - self.k[2] * self.H[2, 1] / self.H[2, 2]

    def mean_y(self, xu):
        return self.center[1] + self.slope_y * (xu - self.center[0])

    def mean_3(self, xu, y):
        H = self.H
        return self.center[2] - (H[2, 0] * (xu - self.center[0]) + H[2, 1] * (y - self.center[1])) / H[2, 2]


def _bob_kernel(a: complex, r: float, st: ProtocolSettings, frame: _FidelityFrame,
                xu: np.ndarray, y: np.ndarray, level: int):
    """G(x_u, y) = int dx3 phi*(x3) phi(x_v s + x_u c) Phi(x_v c - x_u s, x3 - g_u x_u)."""
    s, c = math.sin(st.theta), math.cos(st.theta)
    scale, reach = _LEVELS[level]
    h3 = _trapezoid_step(frame.sigma_3, frame.k[2], scale)
    x3 = frame.mean_3(xu[..., None], y[..., None]) + _offsets(frame.sigma_3, h3, reach)
    xv = y[..., None] + st.g_v * x3
    xu3 = xu[..., None]
    vals = (np.conj(coherent_wavefunction(a, x3))
            * coherent_wavefunction(a, xv * s + xu3 * c)
            * tmsv_wavefunction(r, xv * c - xu3 * s, x3 - st.g_u * xu3))
    return h3 * vals.sum(axis=-1)


def _fidelity_outcomes(a, r, st, frame, level):
    scale, reach = _LEVELS[level]
    hx = 0.4 * scale * frame.sigma_x
    xu = frame.center[0] + _offsets(frame.sigma_x, hx, reach - 2.0)
    # |A(x_u, p)|^2 is Gaussian in p with centre kappa_y/2 and variance 1/(8 sigma_y^2).
    sigma_p = 1.0 / math.sqrt(8.0) / frame.sigma_y
    hp = 0.4 * scale * sigma_p
    p = 0.5 * frame.kappa_y + _offsets(sigma_p, hp, reach)
    # y must resolve exp(-2ipy) across the whole p window.
    hy = _trapezoid_step(frame.sigma_y, _RATE * (p.max() - p.min()) / 2.0 + 1.0, scale)
    y = frame.mean_y(xu)[:, None] + _offsets(frame.sigma_y, hy, reach)[None, :]
    G = _bob_kernel(a, r, st, frame, np.broadcast_to(xu[:, None], y.shape), y, level)
    phase = np.exp(-1j * _RATE * p[None, :, None] * y[:, None, :])
    A = _INV_SQRT_PI * hy * np.einsum("xpy,xy->xp", phase, G)
    return np.array(hx * hp * np.sum(np.abs(A) ** 2))


def _fidelity_parseval(a, r, st, frame, level):
    scale, reach = _LEVELS[level]
    hx = 0.4 * scale * frame.sigma_x
    xu = frame.center[0] + _offsets(frame.sigma_x, hx, reach - 2.0)
    hy = 0.4 * scale * frame.sigma_y
    y = frame.mean_y(xu)[:, None] + _offsets(frame.sigma_y, hy, reach - 2.0)[None, :]
    G = _bob_kernel(a, r, st, frame, np.broadcast_to(xu[:, None], y.shape), y, level)
    return np.array(hx * hy * np.sum(np.abs(G) ** 2))


def oracle_state_fidelity(alpha: AmplitudeLike, r: float, s: ProtocolSettings,
                          method: str = "outcomes") -> float:
    """F(|alpha>) = int dp dx p(p, x) |<alpha|chi_{p,x}>|^2 by nested quadrature.

    The outcome probability cancels against the normalization of Bob's state,
    so the integrand is |int dx3 phi*(x3) chi_unnormalized(x3)|^2 and small
    probabilities never appear in a denominator.  ``method="outcomes"``
    integrates Alice's momentum result explicitly; ``"parseval"`` replaces
    that integral by the equivalent one over the conjugate variable.
    """
    a = complex(as_amplitude(alpha))
    frame = _FidelityFrame(a, r, s)
    if method == "outcomes":
        run = _fidelity_outcomes
    elif method == "parseval":
        run = _fidelity_parseval
    else:
        raise ValueError(f"unknown method {method!r}")
    val, _ = _refined(lambda lvl: run(a, r, s, frame, lvl))
    return float(val)


MIN_BUDGET = 8


def oracle_average_fidelity(dist: InputDistribution, r: float, s: ProtocolSettings,
                            budget: int = 24, method: str = "parseval", tol: float | None = None,
                            max_budget: int = 96) -> OracleEstimate:
    """Pool-averaged fidelity with the brute-force single-state oracle as integrand.

    ``budget`` is the node count per integration axis.  The error estimate is
    the change from a rule with roughly two thirds of the nodes.  With ``tol``
    set, the budget grows by half until the estimate drops below ``tol``;
    passing ``max_budget`` first raises OracleConvergenceError.
    """
    if budget < MIN_BUDGET:
        raise ValueError(f"budget must be >= {MIN_BUDGET}")
    if tol is not None:
        while True:
            est = oracle_average_fidelity(dist, r, s, budget, method)
            if est.error <= tol:
                return est
            budget = (3 * budget + 1) // 2
            if budget > max_budget:
                raise OracleConvergenceError(
                    f"pool average error {est.error:.2e} above {tol:.2e} at the budget cap")

    def fid(alpha):
        return oracle_state_fidelity(alpha, r, s, method=method)

    def rule(n):
        if isinstance(dist, (RealLine, ImagLine)):
            t, w = leggauss(n)
            unit = 1.0 if isinstance(dist, RealLine) else 1j
            return 0.5 * sum(wi * fid(unit * dist.R * ti) for ti, wi in zip(t, w))
        if isinstance(dist, Circumference):
            omega = 2.0 * math.pi * np.arange(n) / n
            return float(np.mean([fid(dist.R * complex(math.cos(o), math.sin(o))) for o in omega]))
        if isinstance(dist, Disk):
            t, w = leggauss(n)
            rho = 0.5 * dist.R * (t + 1.0)
            omega = 2.0 * math.pi * np.arange(n) / n
            total = 0.0
            for rk, wk in zip(rho, w):
                ring = np.mean([fid(rk * complex(math.cos(o), math.sin(o))) for o in omega])
                total += wk * rk * ring
            # (1/(pi R^2)) int rho drho domega = (2/R^2) int rho <.>_omega drho
            return 2.0 / dist.R ** 2 * 0.5 * dist.R * total
        if isinstance(dist, Gaussian):
            t, w = hermgauss(n)
            scale = 1.0 / math.sqrt(dist.lam)
            b = complex(dist.beta)
            total = 0.0
            for ti, wi in zip(t, w):
                for tj, wj in zip(t, w):
                    total += wi * wj * fid(b + scale * complex(ti, tj))
            return total / math.pi
        raise TypeError(f"unknown input distribution {dist!r}")

    fine = rule(budget)
    coarse = rule(max(MIN_BUDGET // 2, (2 * budget) // 3))
    return OracleEstimate(float(fine), float(abs(fine - coarse)))
