"""Domain types and the closed-form single-state teleportation fidelity.

Quadratures follow x = (a + a^dagger)/2 and p = (a - a^dagger)/2i, so
[x, p] = i/2, the vacuum variance is 1/4 and <x|p> = exp(2ipx)/sqrt(pi).
Every numeric routine in the package uses this convention; see
:data:`QUADRATURES`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np

SQRT2 = math.sqrt(2.0)
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class QuadratureConvention:
    """Single record of the canonical-variable convention."""

    commutator: float = 0.5  # [x, p] = i * commutator
    vacuum_variance: float = 0.25
    fourier_rate: float = 2.0  # <x|p> = exp(i * fourier_rate * x * p) / sqrt(pi)


QUADRATURES = QuadratureConvention()


class NumericDomainError(ArithmeticError):
    """A closed form was evaluated outside the region where it is defined."""


def validate_squeezing(r: float) -> float:
    r = float(r)
    if not math.isfinite(r) or r < 0.0:
        raise ValueError(f"squeezing r must be finite and >= 0, got {r!r}")
    return r


@dataclass(frozen=True)
class ProtocolSettings:
    """Beam-splitter angle and Bob's two displacement gains.

    Bob displaces ``x3 -> x3 + g_u * x_u`` and ``p3 -> p3 + g_v * p_v`` after
    Alice reports her homodyne results; the splitter has transmittance
    ``cos(theta)**2``.
    """

    theta: float
    g_u: float
    g_v: float

    def __post_init__(self):
        for name in ("theta", "g_u", "g_v"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not 0.0 < self.theta < HALF_PI:
            raise ValueError(f"theta must lie in (0, pi/2), got {self.theta!r}")

    def mirrored(self) -> "ProtocolSettings":
        """Settings for the quadrature-swapped problem (theta -> pi/2 - theta, g_u <-> g_v)."""
        return ProtocolSettings(HALF_PI - self.theta, self.g_v, self.g_u)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.theta, self.g_u, self.g_v)


ORIGINAL_SETTINGS = ProtocolSettings(0.25 * math.pi, SQRT2, SQRT2)


@dataclass(frozen=True)
class CoherentAmplitude:
    re: float
    im: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "re", float(self.re))
        object.__setattr__(self, "im", float(self.im))

    @classmethod
    def from_polar(cls, magnitude: float, phase: float) -> "CoherentAmplitude":
        return cls(magnitude * math.cos(phase), magnitude * math.sin(phase))

    def magnitude(self) -> float:
        return math.hypot(self.re, self.im)

    def phase(self) -> float:
        return math.atan2(self.im, self.re)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


AmplitudeLike = Union[CoherentAmplitude, complex, float, int]


def as_amplitude(alpha: AmplitudeLike) -> CoherentAmplitude:
    if isinstance(alpha, CoherentAmplitude):
        return alpha
    z = complex(alpha)
    return CoherentAmplitude(z.real, z.imag)


@dataclass(frozen=True)
class MeasurementOutcome:
    """Alice's homodyne results: momentum of mode v and position of mode u."""

    p_v: float
    x_u: float


# Input-state pools.  Each family integrates to one over the complex plane.

@dataclass(frozen=True)
class RealLine:
    """alpha uniform on the real segment [-R, R]."""

    R: float
    tag: ClassVar[str] = "real"

    def __post_init__(self):
        _require_positive("R", self.R)

    def params(self) -> tuple:
        return (self.R,)


@dataclass(frozen=True)
class ImagLine:
    """alpha uniform on the imaginary segment [-iR, iR]."""

    R: float
    tag: ClassVar[str] = "imag"

    def __post_init__(self):
        _require_positive("R", self.R)

    def params(self) -> tuple:
        return (self.R,)


@dataclass(frozen=True)
class Circumference:
    """|alpha| = R with uniformly random phase."""

    R: float
    tag: ClassVar[str] = "circle"

    def __post_init__(self):
        if not math.isfinite(self.R) or self.R < 0:
            raise ValueError(f"R must be finite and >= 0, got {self.R!r}")

    def params(self) -> tuple:
        return (self.R,)


@dataclass(frozen=True)
class Disk:
    """alpha uniform on the disk |alpha| <= R."""

    R: float
    tag: ClassVar[str] = "disk"

    def __post_init__(self):
        _require_positive("R", self.R)

    def params(self) -> tuple:
        return (self.R,)


@dataclass(frozen=True)
class Gaussian:
    """Density (lam/pi) exp(-lam |alpha - beta|^2), i.e. variance 1/(2 lam) per quadrature."""

    lam: float
    beta: CoherentAmplitude = field(default_factory=lambda: CoherentAmplitude(0.0, 0.0))
    tag: ClassVar[str] = "gaussian"

    def __post_init__(self):
        _require_positive("lambda", self.lam)
        object.__setattr__(self, "beta", as_amplitude(self.beta))

    def params(self) -> tuple:
        return (self.lam, self.beta)


InputDistribution = Union[RealLine, ImagLine, Circumference, Disk, Gaussian]

FAMILIES = {cls.tag: cls for cls in (RealLine, ImagLine, Circumference, Disk, Gaussian)}


def _require_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be finite and > 0, got {value!r}")


# Kernels of the closed form.  Both accept scalars or numpy arrays.

def kernel_f1(theta, g):
    """(1 - g sin(theta))**2."""
    return (1.0 - g * np.sin(theta)) ** 2


def kernel_f2(theta, g, r):
    """Half of ``(2 + g^2) cosh^2 r + g^2 cos(2 theta) sinh^2 r - 2 g cos(theta) sinh(2r)``."""
    ch = np.cosh(r)
    sh = np.sinh(r)
    return 0.5 * ((2.0 + g * g) * ch * ch + g * g * np.cos(2.0 * theta) * sh * sh
                  - 2.0 * g * np.cos(theta) * np.sinh(2.0 * r))


def _quadrature_terms(theta, g_u, g_v, r):
    """(f1, f2) for the momentum factor and (f1, f2) for the position factor."""
    f1_p = kernel_f1(theta, g_v)
    f2_p = kernel_f2(theta, g_v, r)
    f1_x = kernel_f1(theta + HALF_PI, g_u)
    f2_x = kernel_f2(theta - HALF_PI, g_u, r)
    if np.any(f2_p <= 0) or np.any(f2_x <= 0):
        raise NumericDomainError(
            f"non-positive f2 at theta={theta}, g_u={g_u}, g_v={g_v}, r={r}")
    return f1_p, f2_p, f1_x, f2_x


def state_fidelity(alpha: AmplitudeLike, r: float, s: ProtocolSettings) -> float:
    """Fidelity of teleporting |alpha>, averaged over Alice's outcomes.

    The result factorizes into a momentum part, set by ``Im(alpha)`` and
    ``g_v``, and a position part, set by ``Re(alpha)`` and ``g_u``.
    """
    a = as_amplitude(alpha)
    r = validate_squeezing(r)
    f1_p, f2_p, f1_x, f2_x = _quadrature_terms(s.theta, s.g_u, s.g_v, r)
    return float(math.exp(-f1_p / f2_p * a.im ** 2 - f1_x / f2_x * a.re ** 2)
                 / math.sqrt(f2_p * f2_x))


def state_fidelity_grid(re, im, r: float, s: ProtocolSettings):
    """Vectorized :func:`state_fidelity` over arrays of Re(alpha), Im(alpha)."""
    r = validate_squeezing(r)
    f1_p, f2_p, f1_x, f2_x = _quadrature_terms(s.theta, s.g_u, s.g_v, r)
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    return np.exp(-f1_p / f2_p * im ** 2 - f1_x / f2_x * re ** 2) / math.sqrt(f2_p * f2_x)


def original_cvtp_fidelity(r: float) -> float:
    """Input-independent fidelity of the balanced, unit-gain protocol: 1/(1 + e^{-2r})."""
    r = validate_squeezing(r)
    return 1.0 / (1.0 + math.exp(-2.0 * r))
