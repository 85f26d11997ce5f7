"""Real roots of a cubic by the trigonometric / Cardano formulas."""

import math

import numpy as np


def _polish(coeffs, x):
    a3, a2, a1, a0 = coeffs
    f = ((a3 * x + a2) * x + a1) * x + a0
    df = (3.0 * a3 * x + 2.0 * a2) * x + a1
    if df != 0.0:
        step = f / df
        if abs(step) <= 1e-3 * max(1.0, abs(x)):
            x -= step
    return x


def real_cubic_roots(a3: float, a2: float, a1: float, a0: float) -> list[float]:
    """Sorted real roots of a3 x^3 + a2 x^2 + a1 x + a0 = 0.

    Uses the trigonometric form when all three roots are real and Cardano's
    formula otherwise; each root gets one Newton step.  Degenerates to the
    quadratic (or linear) formula when the leading coefficient vanishes.
    """
    scale = max(abs(a3), abs(a2), abs(a1), abs(a0))
    if scale == 0.0:
        raise ValueError("all coefficients are zero")
    if abs(a3) <= 1e-14 * scale:
        return _quadratic_roots(a2, a1, a0)

    b, c, d = a2 / a3, a1 / a3, a0 / a3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (0.5 * q) ** 2 + (p / 3.0) ** 3

    if p == 0.0 and q == 0.0:
        roots = [-shift]
    elif disc > 0.0:
        sq = math.sqrt(disc)
        t = float(np.cbrt(-0.5 * q + sq) + np.cbrt(-0.5 * q - sq))
        roots = [t - shift]
    else:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [m * math.cos(phi - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]

    coeffs = (a3, a2, a1, a0)
    return sorted(_polish(coeffs, x) for x in roots)


def _quadratic_roots(a, b, c):
    if a == 0.0:
        if b == 0.0:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    # Avoid cancellation: q = -(b + sign(b) sqrt(disc))/2.
    qv = -0.5 * (b + math.copysign(sq, b))
    roots = [qv / a]
    if qv != 0.0:
        roots.append(c / qv)
    return sorted(roots)
