"""Direct numerical averaging of the single-state fidelity over input pools.

This is the independent check on :mod:`cvtp.average`: it never touches the
averaged closed forms, only the single-state fidelity and the pool density.
Segments and the circle use adaptive Gauss-Kronrod (``scipy.integrate.quad``);
the disk uses Gauss-Kronrod in the radius with a periodic trapezoid rule in
the phase; Gaussian pools use tensor Gauss-Hermite rules of increasing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .model import (
    Circumference,
    Disk,
    Gaussian,
    ImagLine,
    InputDistribution,
    ProtocolSettings,
    RealLine,
    state_fidelity_grid,
)

QUAD_EPSREL = 1e-12


class QuadratureError(RuntimeError):
    """Successive refinements of a numerical average failed to agree."""


@dataclass(frozen=True)
class QuadratureEstimate:
    value: float
    error: float


def density(dist: InputDistribution, re, im):
    """Pool density in the Re(alpha), Im(alpha) plane (only for the non-singular families)."""
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    if isinstance(dist, Disk):
        inside = re * re + im * im <= dist.R ** 2
        return np.where(inside, 1.0 / (math.pi * dist.R ** 2), 0.0)
    if isinstance(dist, Gaussian):
        d2 = (re - dist.beta.re) ** 2 + (im - dist.beta.im) ** 2
        return dist.lam / math.pi * np.exp(-dist.lam * d2)
    raise TypeError(f"{type(dist).__name__} is concentrated on a curve and has no planar density")


def _periodic_mean(func, n0=64, tol=1e-15, n_max=1 << 16):
    """Mean of a smooth 2*pi-periodic function by trapezoid doubling."""
    n = n0
    prev = None
    while True:
        omega = 2.0 * math.pi * np.arange(n) / n
        val = float(np.mean(func(omega)))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val, abs(val - prev)
        if n >= n_max:
            raise QuadratureError(f"periodic rule did not settle at n={n}")
        prev = val
        n *= 2


def _gauss_hermite_mean(func, n0=64, tol=1e-13, n_max=512):
    """E[func(X, Y)] for X, Y iid N(0, 1/2) via tensor Gauss-Hermite, doubling the order."""
    n = n0
    prev = None
    while True:
        t, w = np.polynomial.hermite.hermgauss(n)
        tx, ty = np.meshgrid(t, t, indexing="ij")
        val = float(np.einsum("i,j,ij->", w, w, func(tx, ty)) / math.pi)
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val, abs(val - prev)
        if n >= n_max:
            raise QuadratureError(f"Gauss-Hermite rule did not settle at n={n}")
        prev = val
        n *= 2


def quadrature_average(dist: InputDistribution, r: float, s: ProtocolSettings) -> QuadratureEstimate:
    """Average of the single-state fidelity over ``dist`` by direct quadrature."""

    def fid(re, im):
        return state_fidelity_grid(re, im, r, s)

    if isinstance(dist, (RealLine, ImagLine)):
        R = dist.R
        if isinstance(dist, RealLine):
            f = lambda x: float(fid(x, 0.0))
        else:
            f = lambda y: float(fid(0.0, y))
        val, err = integrate.quad(f, -R, R, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
        return QuadratureEstimate(val / (2.0 * R), err / (2.0 * R))

    if isinstance(dist, Circumference):
        R = dist.R
        f = lambda w: float(fid(R * math.cos(w), R * math.sin(w)))
        val, err = integrate.quad(f, 0.0, 2.0 * math.pi, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
        return QuadratureEstimate(val / (2.0 * math.pi), err / (2.0 * math.pi))

    if isinstance(dist, Disk):
        R = dist.R

        def ring(rho):
            mean, _ = _periodic_mean(lambda w: fid(rho * np.cos(w), rho * np.sin(w)))
            return rho * mean

        val, err = integrate.quad(ring, 0.0, R, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
        return QuadratureEstimate(2.0 * val / R ** 2, 2.0 * err / R ** 2)

    if isinstance(dist, Gaussian):
        scale = 1.0 / math.sqrt(dist.lam)
        b = dist.beta
        val, err = _gauss_hermite_mean(lambda tx, ty: fid(b.re + scale * tx, b.im + scale * ty))
        return QuadratureEstimate(val, err)

    raise TypeError(f"unknown input distribution {dist!r}")
