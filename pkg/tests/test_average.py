import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvtp import (
    Circumference,
    Disk,
    Gaussian,
    ImagLine,
    ProtocolSettings,
    RealLine,
    average_fidelity,
    avg_fidelity_circle,
    avg_fidelity_circle_sym,
    avg_fidelity_disk,
    avg_fidelity_disk_sym,
    avg_fidelity_gaussian,
    avg_fidelity_imag,
    avg_fidelity_real,
    original_cvtp_fidelity,
    state_fidelity,
)
from cvtp.average import DISK_SERIES_CUTOFF, averaged
from cvtp.model import ORIGINAL_SETTINGS
from cvtp.quadrature import quadrature_average

SQRT2 = math.sqrt(2.0)
mpmath.mp.dps = 40
S_GENERIC = ProtocolSettings(0.7, 1.2, 1.4)

thetas = st.floats(0.05, math.pi / 2 - 0.05)
gains = st.floats(-3.0, 3.0)
squeezings = st.floats(0.0, 2.0)
radii = st.floats(0.05, 6.0)


def test_real_small_R_limit_is_vacuum_fidelity():
    for r in (0.0, 0.4, 1.3):
        assert avg_fidelity_real(r, 1e-6, S_GENERIC) == pytest.approx(state_fidelity(0, r, S_GENERIC), abs=1e-8)
        assert avg_fidelity_imag(r, 1e-6, S_GENERIC) == pytest.approx(state_fidelity(0, r, S_GENERIC), abs=1e-8)


def test_real_matches_quadrature_at_original_point():
    ref = quadrature_average(RealLine(1.0), 0.5, ORIGINAL_SETTINGS).value
    assert avg_fidelity_real(0.5, 1.0, ORIGINAL_SETTINGS) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("theta", [0.2, 0.7, 1.3])
def test_real_removable_singularity(theta):
    # g_u = sec(theta) zeroes the position exponent; the average is then alpha-independent
    s = ProtocolSettings(theta, 1 / math.cos(theta), 0.9)
    assert avg_fidelity_real(0.6, 3.0, s) == pytest.approx(state_fidelity(0, 0.6, s), rel=1e-14)
    # just off the singular point, compare with extended-precision erf(z)/z
    gu = 1 / math.cos(theta) + 1e-9
    s_near = ProtocolSettings(theta, gu, 0.9)
    f1x = (1 - mpmath.mpf(gu) * mpmath.cos(theta)) ** 2
    ch2, sh2 = mpmath.cosh(0.6) ** 2, mpmath.sinh(0.6) ** 2
    f2x = ((2 + mpmath.mpf(gu) ** 2) * ch2 - mpmath.mpf(gu) ** 2 * mpmath.cos(2 * theta) * sh2
           - 2 * gu * mpmath.sin(theta) * mpmath.sinh(1.2)) / 2
    f2p = ((2 + 0.81) * ch2 + 0.81 * mpmath.cos(2 * theta) * sh2 - 1.8 * mpmath.cos(theta) * mpmath.sinh(1.2)) / 2
    z = 3 * mpmath.sqrt(f1x / f2x)
    ref = mpmath.sqrt(mpmath.pi) / 2 * mpmath.erf(z) / z / mpmath.sqrt(f2p * f2x)
    assert avg_fidelity_real(0.6, 3.0, s_near) == pytest.approx(float(ref), rel=1e-13)


@given(squeezings, radii, thetas, gains, gains)
def test_imag_is_mirrored_real(r, R, theta, gu, gv):
    s = ProtocolSettings(theta, gu, gv)
    assert avg_fidelity_imag(r, R, s) == pytest.approx(avg_fidelity_real(r, R, s.mirrored()), rel=1e-12)


def test_real_equals_imag_on_symmetric_slice():
    s = ProtocolSettings(math.pi / 4, SQRT2, SQRT2)
    assert avg_fidelity_imag(0.0, 2.0, s) == pytest.approx(avg_fidelity_real(0.0, 2.0, s), rel=1e-14)


def test_circle_zero_radius():
    for r in (0.0, 0.7):
        assert avg_fidelity_circle(r, 0.0, S_GENERIC) == pytest.approx(state_fidelity(0, r, S_GENERIC), rel=1e-14)


@given(squeezings, st.floats(0.0, 6.0), st.floats(-3.0, 3.0))
def test_circle_symmetric_slice_agrees_with_general(r, R, g):
    s = ProtocolSettings(math.pi / 4, g, g)
    assert avg_fidelity_circle_sym(r, R, g) == pytest.approx(avg_fidelity_circle(r, R, s), rel=1e-12, abs=1e-300)


def test_circle_against_quadrature_example():
    s = ProtocolSettings(0.7, 1.2, 1.4)
    ref = quadrature_average(Circumference(2.0), 0.3, s).value
    assert avg_fidelity_circle(0.3, 2.0, s) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 2.0])
def test_circle_sym_special_gains(r):
    assert avg_fidelity_circle_sym(r, 0.0, SQRT2 * math.tanh(r)) == pytest.approx(1.0, abs=1e-14)
    assert avg_fidelity_circle_sym(r, 3.0, SQRT2) == pytest.approx(original_cvtp_fidelity(r), rel=1e-14)


def test_circle_sym_consistency_example():
    s = ProtocolSettings(math.pi / 4, 1.0, 1.0)
    assert avg_fidelity_circle_sym(0.5, 1.0, 1.0) == pytest.approx(avg_fidelity_circle(0.5, 1.0, s), abs=1e-12)


def test_circle_large_radius_does_not_overflow():
    val = avg_fidelity_circle(0.3, 50.0, ProtocolSettings(0.7, 1.3, 1.5))
    assert math.isfinite(val) and 0.0 <= val < 1.0


@pytest.mark.parametrize("r", [0.0, 0.5, 2.0])
def test_disk_sym_removable_singularity(r):
    assert avg_fidelity_disk_sym(r, 1.0, SQRT2) == pytest.approx(original_cvtp_fidelity(r), rel=1e-14)
    # both sides of the series cutoff against the extended-precision expression
    eps = math.sqrt(DISK_SERIES_CUTOFF)
    for g in (SQRT2 + 0.999 * eps, SQRT2 + 1.001 * eps, SQRT2 - 1e-6):
        q = (mpmath.sqrt(2) - g) ** 2
        den = (2 + mpmath.mpf(g) ** 2) * mpmath.cosh(r) ** 2 - mpmath.sqrt(2) * g * mpmath.sinh(2 * r)
        ref = 2 * (1 - mpmath.exp(-q / den)) / q
        assert avg_fidelity_disk_sym(r, 1.0, g) == pytest.approx(float(ref), rel=1e-13)


def test_disk_sym_against_quadrature_example():
    s = ProtocolSettings(math.pi / 4, 1.2, 1.2)
    ref = quadrature_average(Disk(1.0), 0.5, s).value
    assert avg_fidelity_disk_sym(0.5, 1.0, 1.2) == pytest.approx(ref, abs=1e-8)


@given(squeezings, radii, st.floats(-3.0, 3.0))
def test_disk_general_reduces_to_symmetric(r, R, g):
    s = ProtocolSettings(math.pi / 4, g, g)
    assert avg_fidelity_disk(r, R, s) == pytest.approx(avg_fidelity_disk_sym(r, R, g), rel=1e-11, abs=1e-300)


def test_disk_beats_circle_at_same_gain():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        r, R, g = rng.uniform(0, 2), rng.uniform(0.05, 5), rng.uniform(0, 3)
        assert avg_fidelity_disk_sym(r, R, g) >= avg_fidelity_circle_sym(r, R, g) - 1e-15


def test_gaussian_delta_limit():
    beta = 0.8 - 0.4j
    for r in (0.0, 0.9):
        assert avg_fidelity_gaussian(r, 1e8, beta, S_GENERIC) == pytest.approx(
            state_fidelity(beta, r, S_GENERIC), abs=1e-6)


def test_gaussian_against_hermite_example():
    ref = quadrature_average(Gaussian(1.0), 0.4, ORIGINAL_SETTINGS).value
    assert avg_fidelity_gaussian(0.4, 1.0, 0, ORIGINAL_SETTINGS) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("r", [0.0, 0.5, 2.0])
def test_gaussian_broad_pool_recovers_original(r):
    val = avg_fidelity_gaussian(r, 1e-6, 0, ORIGINAL_SETTINGS)
    assert val == pytest.approx(original_cvtp_fidelity(r), abs=1e-5)


@given(squeezings, thetas, gains, gains, st.floats(0.05, 6.0), st.floats(0.05, 10.0), st.floats(0.05, 20.0))
@settings(max_examples=200)
def test_averages_in_unit_interval(r, theta, gu, gv, R, lam, b):
    s = ProtocolSettings(theta, gu, gv)
    for val in (avg_fidelity_real(r, R, s), avg_fidelity_imag(r, R, s), avg_fidelity_circle(r, R, s),
                avg_fidelity_disk(r, R, s), avg_fidelity_gaussian(r, lam, b * (1 + 1j), s)):
        assert 0.0 <= val <= 1.0 + 1e-12


def test_dispatch_and_record():
    for dist in (RealLine(1.0), ImagLine(1.0), Circumference(1.0), Disk(1.0), Gaussian(1.0, 1j)):
        rec = averaged(dist, 0.3, S_GENERIC)
        assert rec.family == dist.tag
        assert rec.value == average_fidelity(dist, 0.3, S_GENERIC)


@pytest.mark.parametrize("call", [
    lambda: avg_fidelity_real(0.1, 0.0, S_GENERIC),
    lambda: avg_fidelity_circle(0.1, -1.0, S_GENERIC),
    lambda: avg_fidelity_disk_sym(0.1, 0.0, 1.0),
    lambda: avg_fidelity_gaussian(0.1, 0.0, 0, S_GENERIC),
    lambda: avg_fidelity_real(-0.1, 1.0, S_GENERIC),
])
def test_invalid_arguments(call):
    with pytest.raises(ValueError):
        call()
