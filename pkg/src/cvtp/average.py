"""Closed-form fidelities averaged over pools of coherent input states.

Every averaged fidelity is the single-state fidelity integrated against the
pool density.  Since the single-state fidelity is a product of a Gaussian in
Re(alpha) and a Gaussian in Im(alpha), each average reduces to an error
function (segments), an exponentially scaled Bessel I0 (circle), or plain
Gaussian integrals (Gaussian pools).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import (
    SQRT2,
    Circumference,
    Disk,
    Gaussian,
    ImagLine,
    InputDistribution,
    NumericDomainError,
    ProtocolSettings,
    RealLine,
    as_amplitude,
    validate_squeezing,
)
from .special import bessel_i0_scaled, erf_ratio

_SQRT_PI = math.sqrt(math.pi)
# |sqrt(2) - g|^2 R^2 below which the disk average uses its Taylor branch.
DISK_SERIES_CUTOFF = 1e-8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class AveragedFidelity:
    value: float
    family: str
    settings: ProtocolSettings
    r: float


def _terms(theta: float, g_u: float, g_v: float, r: float):
    """Scalar (f1, f2) pairs: momentum factor (theta, g_v), position factor (theta +- pi/2, g_u)."""
    ch2 = math.cosh(r) ** 2
    sh2 = math.sinh(r) ** 2
    s2r = math.sinh(2.0 * r)
    c, s = math.cos(theta), math.sin(theta)
    c2 = math.cos(2.0 * theta)
    f1_p = (1.0 - g_v * s) ** 2
    f2_p = 0.5 * ((2.0 + g_v * g_v) * ch2 + g_v * g_v * c2 * sh2 - 2.0 * g_v * c * s2r)
    # sin(theta + pi/2) = cos(theta); cos(theta - pi/2) = sin(theta); cos(2 theta - pi) = -cos(2 theta)
    f1_x = (1.0 - g_u * c) ** 2
    f2_x = 0.5 * ((2.0 + g_u * g_u) * ch2 - g_u * g_u * c2 * sh2 - 2.0 * g_u * s * s2r)
    if f2_p <= 0.0 or f2_x <= 0.0:
        raise NumericDomainError(f"non-positive f2 at theta={theta}, g_u={g_u}, g_v={g_v}, r={r}")
    return f1_p, f2_p, f1_x, f2_x


# Raw evaluators take bare floats so optimizers can skip ProtocolSettings validation.

def real_raw(theta, g_u, g_v, r, R):
    f1_p, f2_p, f1_x, f2_x = _terms(theta, g_u, g_v, r)
    z = R * math.sqrt(f1_x / f2_x)
    return 0.5 * _SQRT_PI * erf_ratio(z) / math.sqrt(f2_p * f2_x)


def imag_raw(theta, g_u, g_v, r, R):
    f1_p, f2_p, f1_x, f2_x = _terms(theta, g_u, g_v, r)
    z = R * math.sqrt(f1_p / f2_p)
    return 0.5 * _SQRT_PI * erf_ratio(z) / math.sqrt(f2_p * f2_x)


def _circle_h(theta, g_u, g_v, r):
    f1_p, f2_p, f1_x, f2_x = _terms(theta, g_u, g_v, r)
    a = f1_x / f2_x
    b = f1_p / f2_p
    return 0.5 * (a + b), 0.5 * (a - b), 1.0 / math.sqrt(f2_p * f2_x)


def circle_raw(theta, g_u, g_v, r, R):
    h_plus, h_minus, pref = _circle_h(theta, g_u, g_v, r)
    R2 = R * R
    # exp(-h+ R^2) I0(h- R^2) = exp(-(h+ - |h-|) R^2) * i0e(h- R^2)
    return pref * math.exp(-(h_plus - abs(h_minus)) * R2) * bessel_i0_scaled(h_minus * R2)


def disk_raw(theta, g_u, g_v, r, R):
    """Disk average for arbitrary settings: (2/R^2) int_0^R rho e^{-h+ rho^2} I0(h- rho^2) drho.

    No elementary antiderivative exists off the symmetric point, so the radial
    integral uses fixed Gauss-Legendre panels (smooth in the parameters).
    """
    h_plus, h_minus, pref = _circle_h(theta, g_u, g_v, r)
    decay = h_plus - abs(h_minus)  # = min of the two quadrature rates, >= 0
    b = abs(h_minus)
    upper = R if decay * R * R <= 40.0 else math.sqrt(40.0 / decay)
    split = min(upper, 3.0 / math.sqrt(b)) if b > 0 else upper
    total = 0.0
    for lo, hi in ((0.0, split), (split, upper)):
        if hi <= lo:
            continue
        rho = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
        rho2 = rho * rho
        vals = rho * np.exp(-decay * rho2) * bessel_i0_scaled(b * rho2)
        total += 0.5 * (hi - lo) * float(np.dot(_GL_WEIGHTS, vals))
    return pref * 2.0 * total / (R * R)


def gaussian_raw(theta, g_u, g_v, r, lam, beta_re, beta_im):
    f1_p, f2_p, f1_x, f2_x = _terms(theta, g_u, g_v, r)
    den_x = f1_x + lam * f2_x
    den_p = f1_p + lam * f2_p
    expo = -lam * f1_x * beta_re ** 2 / den_x - lam * f1_p * beta_im ** 2 / den_p
    return lam * math.exp(expo) / math.sqrt(den_x * den_p)


def avg_fidelity_real(r: float, R: float, s: ProtocolSettings) -> float:
    """Average over alpha uniform on [-R, R].

    Written as (sqrt(pi)/2) * [erf(z)/z] / sqrt(f2 f2') with z = R sqrt(f1'/f2'),
    which stays finite when the position gain is matched (f1' = 0).
    """
    if not R > 0:
        raise ValueError(f"R must be > 0, got {R!r}")
    r = validate_squeezing(r)
    return real_raw(s.theta, s.g_u, s.g_v, r, R)


def avg_fidelity_imag(r: float, R: float, s: ProtocolSettings) -> float:
    """Average over alpha uniform on [-iR, iR]; the g_v and g_u roles of the real case swap."""
    if not R > 0:
        raise ValueError(f"R must be > 0, got {R!r}")
    r = validate_squeezing(r)
    return imag_raw(s.theta, s.g_u, s.g_v, r, R)


def avg_fidelity_circle(r: float, R: float, s: ProtocolSettings) -> float:
    if not R >= 0:
        raise ValueError(f"R must be >= 0, got {R!r}")
    r = validate_squeezing(r)
    return circle_raw(s.theta, s.g_u, s.g_v, r, R)


def avg_fidelity_circle_sym(r: float, R: float, g: float) -> float:
    """Circle average on the symmetric slice theta = pi/4, g_u = g_v = g."""
    if not R >= 0:
        raise ValueError(f"R must be >= 0, got {R!r}")
    r = validate_squeezing(r)
    ch, sh = math.cosh(r), math.sinh(r)
    expo_den = 2.0 * (g * g + 2.0) * ch - 4.0 * SQRT2 * g * sh
    expo = -((SQRT2 * g - 2.0) ** 2) * R * R / ch / expo_den
    den = (g * g + 2.0) * ch * ch - SQRT2 * g * math.sinh(2.0 * r)
    return 2.0 * math.exp(expo) / den


def avg_fidelity_disk_sym(r: float, R: float, g: float) -> float:
    """Disk average on the symmetric slice; g = sqrt(2) is handled by a Taylor branch."""
    if not R > 0:
        raise ValueError(f"R must be > 0, got {R!r}")
    r = validate_squeezing(r)
    den = (2.0 + g * g) * math.cosh(r) ** 2 - SQRT2 * g * math.sinh(2.0 * r)
    q = (SQRT2 - g) ** 2 * R * R
    if q < DISK_SERIES_CUTOFF:
        return 2.0 / den * (1.0 - 0.5 * q / den)
    return -2.0 * math.expm1(-q / den) / q


def avg_fidelity_disk(r: float, R: float, s: ProtocolSettings) -> float:
    """Disk average for general settings (radial Bessel-kernel quadrature)."""
    if not R > 0:
        raise ValueError(f"R must be > 0, got {R!r}")
    r = validate_squeezing(r)
    return disk_raw(s.theta, s.g_u, s.g_v, r, R)


def avg_fidelity_gaussian(r: float, lam: float, beta, s: ProtocolSettings) -> float:
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam!r}")
    b = as_amplitude(beta)
    r = validate_squeezing(r)
    return gaussian_raw(s.theta, s.g_u, s.g_v, r, lam, b.re, b.im)


def family_objective(dist: InputDistribution, r: float) -> Callable[[float, float, float], float]:
    """Closed-form F_av(theta, g_u, g_v) for a fixed pool and squeezing."""
    r = validate_squeezing(r)
    if isinstance(dist, RealLine):
        R = dist.R
        return lambda t, gu, gv: real_raw(t, gu, gv, r, R)
    if isinstance(dist, ImagLine):
        R = dist.R
        return lambda t, gu, gv: imag_raw(t, gu, gv, r, R)
    if isinstance(dist, Circumference):
        R = dist.R
        return lambda t, gu, gv: circle_raw(t, gu, gv, r, R)
    if isinstance(dist, Disk):
        R = dist.R
        return lambda t, gu, gv: disk_raw(t, gu, gv, r, R)
    if isinstance(dist, Gaussian):
        lam, b = dist.lam, dist.beta
        return lambda t, gu, gv: gaussian_raw(t, gu, gv, r, lam, b.re, b.im)
    raise TypeError(f"unknown input distribution {dist!r}")


def average_fidelity(dist: InputDistribution, r: float, s: ProtocolSettings) -> float:
    return family_objective(dist, r)(s.theta, s.g_u, s.g_v)


def averaged(dist: InputDistribution, r: float, s: ProtocolSettings) -> AveragedFidelity:
    return AveragedFidelity(average_fidelity(dist, r, s), dist.tag, s, r)

