import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from svmd.exceptions import DegenerateSpectrumError, InvalidInputError
from svmd.spectral import (
    HalfSpectrum,
    Signal,
    analytic_signal,
    analytic_spectrum,
    center_frequency,
    full_spectrum,
    inverse_to_time,
)

FS = 5000.0


def dft_direct(x):
    """Plain O(n^2) DFT, independent of numpy.fft."""
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def oracle_half(x):
    n = len(x)
    X = dft_direct(x)[: n // 2 + 1].copy()
    X[1:(n + 1) // 2] *= 2
    return X


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@given(arrays(float, st.integers(4, 300), elements=finite))
@settings(max_examples=60, deadline=None)
def test_round_trip(x):
    s = Signal(x, FS)
    back = inverse_to_time(analytic_spectrum(s)).samples
    scale = max(np.max(np.abs(x)), 1e-300)
    assert np.max(np.abs(back - x)) <= 1e-10 * scale + 1e-300


@pytest.mark.parametrize("n", [4, 5, 16, 31, 64])
def test_bins_match_direct_dft(n):
    x = np.random.default_rng(n).standard_normal(n)
    h = analytic_spectrum(Signal(x, FS))
    np.testing.assert_allclose(h.bins, oracle_half(x), atol=1e-9)


@given(arrays(float, st.integers(4, 200), elements=finite))
@settings(max_examples=40, deadline=None)
def test_negative_frequencies_vanish(x):
    h = analytic_spectrum(Signal(x, FS))
    z = analytic_signal(h)
    spec = np.fft.fft(z)
    n = len(x)
    neg = spec[n // 2 + 1:]
    peak = np.max(np.abs(spec))
    if peak > 0:
        assert np.max(np.abs(neg), initial=0.0) <= 1e-10 * peak


def test_full_spectrum_is_one_sided():
    x = np.random.default_rng(1).standard_normal(64)
    full = full_spectrum(analytic_spectrum(Signal(x, FS)))
    assert full.size == 64
    assert np.all(full[33:] == 0)


def test_parseval():
    x = np.random.default_rng(2).standard_normal(101)
    h = analytic_spectrum(Signal(x, FS))
    z = analytic_signal(h)
    assert np.isclose(np.sum(np.abs(z) ** 2), h.power / x.size, rtol=1e-12)


def test_zero_signal_gives_zero_bins():
    h = analytic_spectrum(Signal(np.zeros(1024), FS))
    assert not np.any(h.bins)


def test_constant_only_dc():
    h = analytic_spectrum(Signal(np.ones(100), FS))
    assert h.bins[0] == pytest.approx(100)
    assert np.max(np.abs(h.bins[1:])) < 1e-9


def test_cosine_line_and_quadrature():
    t = np.arange(5000) / FS
    s = Signal(np.cos(2 * np.pi * 100 * t), FS)
    h = analytic_spectrum(s)
    k = int(np.argmax(np.abs(h.bins)))
    assert h.freqs[k] == 100
    # unnormalised forward DFT of cos: n/2 per side, doubled -> n
    assert abs(h.bins[k]) == pytest.approx(5000, rel=1e-9)
    z = analytic_signal(h)
    np.testing.assert_allclose(z.imag[100:-100], np.sin(2 * np.pi * 100 * t)[100:-100], atol=1e-9)


def test_dc_bin_inverts_to_constant():
    b = np.zeros(51, dtype=complex)
    b[0] = 100.0
    s = inverse_to_time(HalfSpectrum(b, 1.0, 100))
    np.testing.assert_allclose(s.samples, 1.0)


def test_unit_bin_at_45_hz_matches_direct_inverse():
    n = 5000
    b = np.zeros(n // 2 + 1, dtype=complex)
    b[45] = 1.0
    s = inverse_to_time(HalfSpectrum(b, 1.0, n))
    k = np.arange(n)
    direct = np.real(np.exp(2j * np.pi * 45 * k / n)) / n
    np.testing.assert_allclose(s.samples, direct, atol=1e-15)


def test_center_single_and_pair():
    b = np.zeros(2501, dtype=complex)
    b[100] = 3.0
    assert center_frequency(HalfSpectrum(b, 1.0, 5000)) == pytest.approx(100)
    b[:] = 0
    b[40] = 1.0
    b[60] = -1.0j
    assert center_frequency(HalfSpectrum(b, 1.0, 5000)) == pytest.approx(50)


def test_center_of_signal1_chirp():
    # constant-envelope chirp: power-weighted mean frequency equals the time
    # average of the instantaneous frequency 50 - 10 t, i.e. 45 Hz
    t = np.arange(5000) / FS
    h = analytic_spectrum(Signal(np.sin(100 * np.pi * t - 10 * np.pi * t ** 2), FS))
    assert abs(center_frequency(h) - 45) < 0.5


@given(st.floats(1e-3, 1e3) | st.floats(-1e3, -1e-3))
@settings(max_examples=30, deadline=None)
def test_center_scale_invariant(c):
    x = np.random.default_rng(3).standard_normal(128)
    h = analytic_spectrum(Signal(x, FS))
    assert center_frequency(c * h) == pytest.approx(center_frequency(h), rel=1e-12)


def test_errors():
    with pytest.raises(InvalidInputError):
        analytic_spectrum(Signal(np.ones(3), FS))
    with pytest.raises(InvalidInputError):
        Signal(np.array([1.0, np.nan, 2, 3]), FS)
    with pytest.raises(InvalidInputError):
        Signal(np.ones(8), 0.0)
    with pytest.raises(InvalidInputError):
        HalfSpectrum(np.zeros(7, dtype=complex), 1.0, 20)
    with pytest.raises(DegenerateSpectrumError):
        center_frequency(HalfSpectrum(np.zeros(11, dtype=complex), 1.0, 20))
