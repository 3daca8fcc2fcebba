import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svmd.exceptions import InvalidInputError
from svmd.metrics import er
from svmd.signals import gen_signal
from svmd.spectral import Signal
from svmd.vmd import VmdConfig, mirror_extend, vmd_decompose

FS = 5000.0
T = np.arange(5000) / FS


def test_mirror_small_example():
    out = mirror_extend(Signal(np.array([1.0, 2, 3, 4]), 1.0), 0.5)
    assert out.samples.tolist() == [3, 2, 1, 2, 3, 4, 3, 2]
    assert out.t0_s == -2.0


@given(half=st.lists(st.floats(-10, 10), min_size=2, max_size=30), frac=st.floats(0.01, 0.45))
@settings(max_examples=40, deadline=None)
def test_mirror_keeps_symmetry(half, frac):
    x = np.array(half + half[::-1])
    out = mirror_extend(Signal(x, 1.0), frac).samples
    assert np.array_equal(out, out[::-1])


def test_mirror_smallest_fraction():
    s = Signal(np.arange(10.0), 1.0)
    out = mirror_extend(s, 1e-9)
    assert len(out) == 12
    assert out.samples[0] == 1.0 and out.samples[-1] == 8.0


@given(n=st.integers(8, 200), frac=st.floats(0.01, 0.9))
@settings(max_examples=40, deadline=None)
def test_mirror_length(n, frac):
    out = mirror_extend(Signal(np.arange(float(n)), 1.0), frac)
    m = int(np.ceil(frac * n))
    assert len(out) == n + 2 * m
    assert np.array_equal(out.samples[m:m + n], np.arange(float(n)))


def test_mirror_rejects():
    with pytest.raises(InvalidInputError):
        mirror_extend(Signal(np.arange(10.0), 1.0), 0.0)
    with pytest.raises(InvalidInputError):
        mirror_extend(Signal(np.arange(10.0), 1.0), 1.0)


def _tones(freqs):
    return [a * np.cos(2 * np.pi * f * T) for a, f in zip((1.0, 0.6, 0.3), freqs)]


def test_well_separated_tones_unmirrored():
    parts = _tones((45.0, 300.0, 900.0))
    r = vmd_decompose(Signal(sum(parts), FS), VmdConfig(k_modes=3, mirror_ends=False))
    assert len(r.modes) == 3
    for p in parts:
        assert min(er(m.time, p) for m in r.modes) < 0.02


def test_well_separated_tones_mirrored():
    # the mirror puts a slope kink at each end; its spread grows with frequency
    parts = _tones((45.0, 150.0, 300.0))
    r = vmd_decompose(Signal(sum(parts), FS), VmdConfig(k_modes=3))
    for p in parts:
        assert min(er(m.time, p) for m in r.modes) < 0.02


@pytest.mark.parametrize("init", ["uniform", "peaks"])
def test_exactly_k_and_conservation(init):
    s = gen_signal(1, 0.1, 0).mixture
    for k in (1, 2, 4):
        r = vmd_decompose(s, VmdConfig(k_modes=k, init=init))
        assert len(r.modes) == k
        assert r.conservation_error() <= 1e-9


def test_scale_equivariance():
    s = gen_signal(2, 0.1, 1).mixture
    a = vmd_decompose(s)
    b = vmd_decompose(s.scaled(3.7))
    for x, y in zip(a.modes, b.modes):
        assert np.linalg.norm(y.time.samples - 3.7 * x.time.samples) <= 1e-8 * np.linalg.norm(y.time.samples)


def test_signal1_centers():
    r = vmd_decompose(gen_signal(1, 0.1, 0).mixture, VmdConfig(k_modes=3))
    c = sorted(r.centers_hz)
    assert c[0] < 5
    assert abs(c[1] - 45) < 5
    assert abs(c[2] - 100) < 5


def test_underbinning_aliases():
    b = gen_signal(1, 0.1, 0)
    r = vmd_decompose(b.mixture, VmdConfig(k_modes=2))
    worst = max(min(er(m.time, t) for m in r.modes) for t in b.true_modes)
    assert worst > 0.2


def test_overbinning_duplicates():
    r = vmd_decompose(gen_signal(1, 0.1, 0).mixture, VmdConfig(k_modes=5))
    c = np.sort(r.centers_hz)
    assert np.min(np.diff(c)) < 15


def test_deterministic():
    s = gen_signal(3, 0.1, 0).mixture
    a, b = vmd_decompose(s), vmd_decompose(s)
    for x, y in zip(a.modes, b.modes):
        assert np.array_equal(x.time.samples, y.time.samples)


def test_no_mirror_path():
    s = gen_signal(1, 0.1, 0).mixture
    r = vmd_decompose(s, VmdConfig(mirror_ends=False))
    assert len(r.modes[0].time) == 5000
    assert r.conservation_error() <= 1e-9


@pytest.mark.parametrize("kw", [
    {"k_modes": 0}, {"alpha": 0}, {"eta_inner": -1}, {"max_iter": 0},
    {"mirror_frac": 0}, {"init": "random"},
])
def test_config_rejects(kw):
    with pytest.raises(InvalidInputError):
        VmdConfig(**kw)
