import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svmd.core import SvmdConfig, decompose
from svmd.elongation import (
    PcrConfig,
    elongate,
    end_weights,
    extract_end_components,
    fit_end_trend,
    truncate,
)
from svmd.exceptions import InvalidInputError
from svmd.pipeline import run_pipeline
from svmd.signals import gen_signal
from svmd.spectral import Signal

FS = 5000.0
T = np.arange(5000) / FS


def sig(x):
    return Signal(np.asarray(x, dtype=float), FS)


# fit_end_trend

def test_line_trend_both_sides():
    s = sig(2 * T)
    left = fit_end_trend(s, PcrConfig(), "left")
    right = fit_end_trend(s, PcrConfig(), "right")
    assert left == pytest.approx([0.0, 2.0], abs=1e-9)
    # coefficients are local to the end sample
    assert right == pytest.approx([2 * T[-1], 2.0], abs=1e-9)


def test_quadratic_under_cosine():
    s = sig(5 * T ** 2 + np.cos(2 * np.pi * 100 * T))
    for side in ("left", "right"):
        c = fit_end_trend(s, PcrConfig(trend_order=2), side)
        assert c[2] == pytest.approx(5.0, rel=0.02)


def test_constant_has_no_slope():
    c = fit_end_trend(sig(np.full(5000, 3.25)), PcrConfig(), "left")
    assert c[1] == pytest.approx(0.0, abs=1e-9)
    assert c[0] == pytest.approx(3.25, abs=1e-9)


def test_window_too_short():
    s = Signal(np.arange(40.0), FS)
    with pytest.raises(InvalidInputError):
        fit_end_trend(s, PcrConfig(end_window_frac=0.1, trend_order=2), "left")


def test_bad_side():
    with pytest.raises(InvalidInputError):
        fit_end_trend(sig(T), PcrConfig(), "middle")


def test_end_weights_peak_at_end():
    w = end_weights(5, 1.0)
    assert w == pytest.approx([1, 1 / 2, 1 / 3, 1 / 4, 1 / 5])
    assert end_weights(4, 0.0) == pytest.approx(np.ones(4))


@pytest.mark.parametrize("kw", [
    {"end_window_frac": 0.0}, {"end_window_frac": 0.6}, {"extension_frac": -0.1},
    {"trend_order": 3}, {"n_principal": -1}, {"weighting_exponent": -1.0},
    {"closure_frac": 1.5},
])
def test_config_rejects(kw):
    with pytest.raises(InvalidInputError):
        PcrConfig(**kw)


# extract_end_components

def test_single_cosine_parameters():
    comps = extract_end_components(sig(np.cos(2 * np.pi * 50 * T)), 1)
    assert len(comps) == 1
    amp, freq, phase = comps[0]
    assert amp == pytest.approx(1.0, rel=0.02)
    assert freq == pytest.approx(50.0, abs=0.5)
    assert phase == pytest.approx(0.0, abs=0.05)


def test_two_cosines_ordered_by_amplitude():
    x = np.cos(2 * np.pi * 45 * T) + 0.5 * np.cos(2 * np.pi * 100 * T)
    comps = extract_end_components(sig(x), 2)
    assert [round(c[1]) for c in comps] == [45, 100]
    assert comps[0][0] > comps[1][0]
    assert comps[0][0] == pytest.approx(1.0, rel=0.02)
    assert comps[1][0] == pytest.approx(0.5, rel=0.02)


def test_zero_signal_has_no_components():
    assert extract_end_components(sig(np.zeros(5000)), 3) == []


def test_fewer_peaks_than_asked():
    comps = extract_end_components(sig(np.cos(2 * np.pi * 50 * T)), 3)
    assert 1 <= len(comps) <= 3
    assert comps[0][1] == pytest.approx(50.0, abs=0.5)


@given(f=st.floats(20, 2000), ph=st.floats(-3, 3))
@settings(max_examples=30, deadline=None)
def test_phase_oracle(f, ph):
    x = 0.7 * np.cos(2 * np.pi * f * T + ph)
    amp, freq, phase = extract_end_components(sig(x), 1)[0]
    assert amp == pytest.approx(0.7, rel=0.02)
    assert freq == pytest.approx(f, abs=0.5)
    # compare on the circle
    assert abs(np.angle(np.exp(1j * (phase - ph)))) < 0.05 + 2 * np.pi * abs(freq - f) * T[-1]


# elongate

def test_line_continues():
    s = sig(2 * T)
    e = elongate(s, PcrConfig())
    ext = e.left_len
    t_left = (np.arange(-ext, 0)) / FS
    left = e.extended.samples[:ext]
    assert np.max(np.abs(left - 2 * t_left)) <= 0.01 * np.max(np.abs(2 * t_left))


def test_lengths_and_interior():
    s = gen_signal(1, 0.1, 0).mixture
    e = elongate(s, PcrConfig())
    assert len(e.extended) == len(s) + e.left_len + e.right_len
    assert e.left_len == e.right_len == 1000
    assert np.array_equal(e.extended.samples[e.left_len:e.left_len + len(s)], s.samples)
    assert e.extended.t0_s == pytest.approx(s.t0_s - e.left_len / FS)


def test_signal1_trend_continuation():
    b = gen_signal(1, 0.0, 0)
    e = elongate(b.mixture, PcrConfig())
    ext = e.left_len
    t_left = np.arange(-ext, 0) / FS
    t_right = 1 + np.arange(ext) / FS
    truth = np.concatenate([2 * t_left, 2 * t_right])
    fitted = np.concatenate([
        np.polynomial.polynomial.polyval(t_left - T[0], e.trend_coeffs_left),
        np.polynomial.polynomial.polyval(t_right - T[-1], e.trend_coeffs_right),
    ])
    rms = np.sqrt(np.mean((fitted - truth) ** 2))
    assert rms <= 0.05 * np.sqrt(np.mean(truth ** 2))


def test_zero_extension_is_identity():
    s = gen_signal(2, 0.1, 0).mixture
    e = elongate(s, PcrConfig(extension_frac=0.0))
    assert e.left_len == e.right_len == 0
    assert e.extended is s


@pytest.mark.parametrize("sid", [1, 2, 3, 4])
@pytest.mark.parametrize("sigma", [0.0, 0.1, 0.5])
def test_interface_continuity(sid, sigma):
    s = gen_signal(sid, sigma, 3).mixture
    span = np.ptp(s.samples)
    for cfg in (PcrConfig(), PcrConfig(closure_frac=0.8)):
        e = elongate(s, cfg)
        left, right = e.interface_mismatch()
        assert abs(left) <= 1e-9 * span
        assert abs(right) <= 1e-9 * span


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(-5, 5))
@settings(max_examples=25, deadline=None)
def test_polynomial_exactness(a, b, c):
    x = a + b * T + c * T ** 2
    e = elongate(sig(x), PcrConfig(trend_order=2))
    ext = e.left_len
    tt = np.concatenate([np.arange(-ext, 0) / FS, 1 + np.arange(ext) / FS])
    want = a + b * tt + c * tt ** 2
    got = np.concatenate([e.extended.samples[:ext], e.extended.samples[-ext:]])
    scale = max(np.max(np.abs(want)), 1.0)
    assert np.max(np.abs(got - want)) <= 1e-6 * scale


def test_closure_matches_far_ends():
    s = gen_signal(2, 0.1, 0).mixture
    e = elongate(s, PcrConfig(closure_frac=0.8))
    x = e.extended.samples
    assert x[0] == pytest.approx(x[-1], abs=1e-12)


def test_global_trend_mode():
    s = sig(2 * T + 0.3 * np.cos(2 * np.pi * 45 * T))
    c = fit_end_trend(s, PcrConfig(global_trend=True), "left")
    assert c[1] == pytest.approx(2.0, rel=0.02)


# truncate

def test_truncate_identity_without_extension():
    s = gen_signal(1, 0.1, 0).mixture
    e = elongate(s, PcrConfig(extension_frac=0.0))
    r = decompose(s, SvmdConfig(max_outer=2))
    assert truncate(r, e) is r


def test_truncate_lengths_and_sum():
    b = gen_signal(1, 0.1, 0)
    p = run_pipeline(b.mixture)
    assert all(len(m.time) == 5000 for m in p.result.modes)
    total = sum(m.time.samples for m in p.result.modes) + p.result.residual_signal().samples
    assert np.max(np.abs(total - b.mixture.samples)) <= 1e-9 * np.max(np.abs(b.mixture.samples))


def test_truncate_length_mismatch():
    s = gen_signal(1, 0.1, 0).mixture
    e = elongate(s, PcrConfig())
    r = decompose(s, SvmdConfig(max_outer=1))
    with pytest.raises(InvalidInputError):
        truncate(r, e)
