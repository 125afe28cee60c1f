import math

import numpy as np
import pytest

from mimo_mccdma.channel import TAGS, Rng, SnrPoint, awgn_add, complex_gaussian, rayleigh_draw


def test_snr_conventions():
    p = SnrPoint(10.0)
    assert p.noise_var == pytest.approx(0.1)
    # QPSK, rate 1/2, spreading 8: Eb/N0 = Es/N0 + 10 log10(8)
    assert p.eb_n0_db(2, 0.5, 8) == pytest.approx(10 + 10 * math.log10(8))
    assert SnrPoint(math.inf).noiseless and SnrPoint(math.inf).noise_var == 0.0
    with pytest.raises(ValueError):
        SnrPoint(math.nan)


def test_streams_are_reproducible_and_distinct():
    r = Rng(7)
    a = r.stream(3, "noise").standard_normal(5)
    assert np.array_equal(a, Rng(7).stream(3, "noise").standard_normal(5))
    assert not np.array_equal(a, r.stream(4, "noise").standard_normal(5))
    assert not np.array_equal(a, r.stream(3, "fading").standard_normal(5))
    assert not np.array_equal(a, Rng(8).stream(3, "noise").standard_normal(5))
    assert np.array_equal(r.stream(0, TAGS["bits"]).integers(0, 9, 4), r.stream(0, "bits").integers(0, 9, 4))


def test_complex_gaussian_moments(rng):
    z = complex_gaussian(rng, (200_000,), var=2.0)
    assert np.var(z) == pytest.approx(2.0, rel=0.02)
    assert np.mean(z.real**2) == pytest.approx(1.0, rel=0.02)
    assert abs(np.mean(z.real * z.imag)) < 0.02


def test_rayleigh_shape_and_power(rng):
    H = rayleigh_draw(rng, (1000,), rx=3, tx=2)
    assert H.shape == (1000, 3, 2)
    assert np.mean(np.abs(H) ** 2) == pytest.approx(1.0, rel=0.05)


def test_tail_probability_of_tap_power():
    h = rayleigh_draw(Rng(0).stream(0, "fading"), 1_000_000, rx=1, tx=1)
    assert np.mean(np.abs(h) ** 2 > 1) == pytest.approx(math.exp(-1), abs=0.005)


def test_awgn(rng):
    x = np.zeros(100_000, dtype=complex)
    y = awgn_add(x, SnrPoint(3.0), rng)
    assert np.var(y) == pytest.approx(10 ** -0.3, rel=0.02)
    assert np.array_equal(awgn_add(x, SnrPoint(math.inf), None), x)
    with pytest.raises(ValueError):
        awgn_add(x, SnrPoint(0.0), None)
