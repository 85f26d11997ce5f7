"""Error function and exponentially scaled modified Bessel I0.

Both are thin wrappers over the C implementations in :mod:`math` and
:mod:`scipy.special` (relative error near machine epsilon), plus the two
series branches the averaged fidelities need at removable singularities.
"""

import math

import numpy as np
from scipy import special as _sp

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)

# Below these arguments the truncated series is exact to double precision.
ERF_RATIO_SERIES_CUTOFF = 1e-3
EXPM1_RATIO_SERIES_CUTOFF = 1e-8


def erf(x):
    """Standard error function; odd, saturates to +-1."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return _sp.erf(np.asarray(x, dtype=float))


def bessel_i0_scaled(x):
    """exp(-|x|) * I0(x); finite for every finite x."""
    if np.ndim(x) == 0:
        return float(_sp.i0e(float(x)))
    return _sp.i0e(np.asarray(x, dtype=float))


def erf_ratio(z: float) -> float:
    """erf(z)/z for z >= 0, continuous through z = 0 where it equals 2/sqrt(pi)."""
    if z < ERF_RATIO_SERIES_CUTOFF:
        z2 = z * z
        # erf(z)/z = 2/sqrt(pi) * (1 - z^2/3 + z^4/10 - z^6/42 + ...)
        return _TWO_OVER_SQRT_PI * (1.0 - z2 / 3.0 + z2 * z2 / 10.0)
    return math.erf(z) / z


def one_minus_exp_ratio(x: float) -> float:
    """(1 - exp(-x))/x for x >= 0, continuous through x = 0 where it equals 1."""
    if x < EXPM1_RATIO_SERIES_CUTOFF:
        return 1.0 - 0.5 * x
    return -math.expm1(-x) / x
