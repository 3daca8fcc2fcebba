"""End extension by principal component restoring (PCR).

Near each end of the record a low-order trend and a handful of dominant
sinusoids are fitted; the signal is then continued past the end with the
trend's extrapolation plus those sinusoids.  Decomposing the longer record
and cropping the result back keeps the wrap-around discontinuity of the DFT
away from the samples that matter.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .core import DecompositionResult, Mode
from .exceptions import InvalidInputError, SvmdError
from .spectral import Signal, analytic_spectrum

logger = logging.getLogger(__name__)

SIDES = ("left", "right")
# below this many cycles per end window, peak frequencies get refined
FEW_CYCLES = 4.0


@dataclass(frozen=True)
class PcrConfig:
    """Elongation settings.

    The end window spans ``end_window_frac`` of the record; each side is
    extended by ``extension_frac`` of the record length.  Sample weights in
    the end fit fall off as ``rank ** -weighting_exponent`` with distance
    from the end (the end sample has rank 1).

    ``closure_frac`` > 0 blends the outer part of each extension (that
    fraction of it) toward the mean of the two far-end values with a
    raised-cosine fade, so the extended record wraps around without a jump.
    """

    end_window_frac: float = 0.1
    extension_frac: float = 0.2
    trend_order: int = 1
    n_principal: int = 3
    weighting_exponent: float = 1.0
    global_trend: bool = False
    closure_frac: float = 0.0
    refine_freqs: bool = True

    def __post_init__(self):
        if not 0 < self.end_window_frac <= 0.5:
            raise InvalidInputError("end_window_frac must lie in (0, 0.5]")
        if self.extension_frac < 0:
            raise InvalidInputError("extension_frac must be non-negative")
        if self.trend_order not in (0, 1, 2):
            raise InvalidInputError("trend_order must be 0, 1 or 2")
        if self.n_principal < 0:
            raise InvalidInputError("n_principal must be non-negative")
        if self.weighting_exponent < 0:
            raise InvalidInputError("weighting_exponent must be non-negative")
        if not 0 <= self.closure_frac <= 1:
            raise InvalidInputError("closure_frac must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class Elongation:
    """An extended record and the models used to build it.

    Trend coefficients are in ascending powers of ``t - t_edge`` where
    ``t_edge`` is the time of the boundary sample on that side.  Components
    are ``(amplitude, frequency_hz, phase)`` triples describing
    ``amplitude * cos(2 pi frequency_hz t + phase)`` in absolute time.
    """

    extended: Signal
    original: Signal
    left_len: int
    right_len: int
    trend_coeffs_left: np.ndarray = field(default_factory=lambda: np.zeros(1))
    trend_coeffs_right: np.ndarray = field(default_factory=lambda: np.zeros(1))
    components_left: tuple = ()
    components_right: tuple = ()
    offset_left: float = 0.0
    offset_right: float = 0.0

    @property
    def n_time(self) -> int:
        return len(self.original)

    def model(self, side: str, t: np.ndarray) -> np.ndarray:
        """Offset-free trend plus sinusoids of one side, at absolute times ``t``."""
        s = self.original
        if side == "left":
            coeffs, comps, edge = self.trend_coeffs_left, self.components_left, s.time[0]
        else:
            coeffs, comps, edge = self.trend_coeffs_right, self.components_right, s.time[-1]
        return _evaluate(coeffs, comps, np.asarray(t, dtype=float), edge)

    def interface_mismatch(self) -> tuple:
        """Offset-corrected model minus the original end sample, per side."""
        s = self.original
        left = self.model("left", s.time[:1])[0] + self.offset_left - s.samples[0]
        right = self.model("right", s.time[-1:])[0] + self.offset_right - s.samples[-1]
        return float(left), float(right)


def _evaluate(coeffs, comps, t, edge):
    y = np.polynomial.polynomial.polyval(t - edge, coeffs)
    for amp, freq, phase in comps:
        y = y + amp * np.cos(2 * np.pi * freq * t + phase)
    return y


def end_weights(m: int, exponent: float) -> np.ndarray:
    """Weights ordered from the end sample inwards."""
    return np.arange(1, m + 1, dtype=float) ** (-exponent)


def _end_window(s: Signal, cfg: PcrConfig, side: str):
    if side not in SIDES:
        raise InvalidInputError(f"side must be one of {SIDES}")
    n = len(s)
    t = s.time
    if cfg.global_trend:
        return t, s.samples, np.ones(n), (t[0] if side == "left" else t[-1])
    m = max(int(round(cfg.end_window_frac * n)), 1)
    need = 4 * (cfg.trend_order + 1)
    if m < need:
        raise InvalidInputError(
            f"end window holds {m} samples; order {cfg.trend_order} needs {need}")
    w = end_weights(m, cfg.weighting_exponent)
    if side == "left":
        return t[:m], s.samples[:m], w, t[0]
    return t[-m:], s.samples[-m:], w[::-1], t[-1]


def _sinusoid_columns(t, freqs):
    cols = []
    for f0 in freqs:
        cols.append(np.cos(2 * np.pi * f0 * t))
        cols.append(np.sin(2 * np.pi * f0 * t))
    return cols


def _to_triples(coefs, freqs):
    out = []
    for i, f0 in enumerate(freqs):
        a, b = coefs[2 * i], coefs[2 * i + 1]
        # a cos + b sin == A cos(x + phi)
        out.append((float(math.hypot(a, b)), float(f0), float(math.atan2(-b, a))))
    out.sort(key=lambda c: -c[0])
    return out


def extract_end_components(s_detrended: Signal, n: int, min_hz: float = 0.0) -> list:
    """Dominant sinusoids of a (detrended) record.

    Peaks are located on a Hann-windowed, zero-padded magnitude spectrum and
    refined by parabolic interpolation of the log magnitude.  Amplitudes and
    phases then come from a joint least-squares fit at those frequencies.
    Fewer than ``n`` triples are returned when fewer peaks exist.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    x = s_detrended.samples
    size = x.size
    fs = s_detrended.sample_rate_hz
    pad = 8
    nfft = 1 << int(math.ceil(math.log2(pad * size)))
    mag = np.abs(np.fft.rfft(x * np.hanning(size), nfft))
    top = mag.max()
    if not top > 0:
        return []
    # main lobe of a Hann window is +/-2 unpadded bins wide
    idx, _ = find_peaks(mag, distance=max(2 * nfft // size, 1), height=1e-6 * top)
    df = fs / nfft
    idx = idx[idx * df >= min_hz]
    idx = idx[np.argsort(mag[idx])[::-1][:n]]
    if idx.size == 0:
        return []
    freqs = []
    for k in idx:
        a, b, c = np.log(mag[k - 1:k + 2] + 1e-300)
        denom = a - 2 * b + c
        delta = 0.5 * (a - c) / denom if denom != 0 else 0.0
        freqs.append((k + float(np.clip(delta, -0.5, 0.5))) * df)
    t = s_detrended.time
    design = np.column_stack(_sinusoid_columns(t, freqs))
    coefs, *_ = np.linalg.lstsq(design, x, rcond=None)
    return _to_triples(coefs, freqs)


def _weighted_fit(t, y, sw, poly_cols, freqs):
    design = np.column_stack(poly_cols + _sinusoid_columns(t, freqs))
    coefs, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    return coefs, sw * (y - design @ coefs)


def _fit_side(s: Signal, cfg: PcrConfig, side: str):
    """Joint weighted fit of trend polynomial and end sinusoids on one side.

    Peak picking seeds the frequencies.  Those with fewer than
    ``FEW_CYCLES`` cycles in the window are then refined by nonlinear least
    squares, with the trend and amplitudes solved exactly at every step.
    """
    t, y, w, edge = _end_window(s, cfg, side)
    tau = t - edge
    order = cfg.trend_order
    poly_cols = [tau ** p for p in range(order + 1)]
    sw = np.sqrt(w)

    freqs = []
    if cfg.n_principal > 0:
        # provisional unweighted detrend, only used to find the oscillations
        base = np.column_stack(poly_cols)
        c0, *_ = np.linalg.lstsq(base, y, rcond=None)
        detr = Signal(y - base @ c0, s.sample_rate_hz, t[0])
        span = t[-1] - t[0] + 1 / s.sample_rate_hz
        # below one cycle per window an oscillation is just trend
        lo = 1.0 / span
        comps = extract_end_components(detr, cfg.n_principal, min_hz=lo)
        freqs = [f0 for _, f0, _ in comps]
        # peak interpolation is only biased when the window holds a few cycles
        slow = [i for i, f0 in enumerate(freqs) if f0 * span < FEW_CYCLES]
        if slow and cfg.refine_freqs:
            x0 = np.asarray(freqs)

            def resid(fs):
                f = x0.copy()
                f[slow] = fs
                return _weighted_fit(t, y, sw, poly_cols, list(f))[1]

            lower = np.maximum(x0[slow] - 0.5 / span, lo)
            upper = x0[slow] + 0.5 / span
            sol = least_squares(resid, np.clip(x0[slow], lower, upper),
                                bounds=(lower, upper), x_scale=1.0 / span)
            if sol.success:
                x0[slow] = sol.x
                freqs = [float(f0) for f0 in x0]

    coefs, _ = _weighted_fit(t, y, sw, poly_cols, freqs)
    trend = np.asarray(coefs[: order + 1], dtype=float)
    return trend, tuple(_to_triples(coefs[order + 1:], freqs))


def fit_end_trend(s: Signal, cfg: PcrConfig = PcrConfig(), side: str = "left") -> np.ndarray:
    """Trend polynomial near one end, oscillations removed.

    Coefficients are ascending powers of ``t - t_edge`` (seconds).
    """
    return _fit_side(s, cfg, side)[0]


def elongate(s: Signal, cfg: PcrConfig = PcrConfig()) -> Elongation:
    """Extend ``s`` at both ends with fitted trend plus end sinusoids."""
    n = len(s)
    ext = int(round(cfg.extension_frac * n))
    if ext == 0:
        return Elongation(s, s, 0, 0)
    fs = s.sample_rate_hz
    t = s.time
    trend_l, comps_l = _fit_side(s, cfg, "left")
    trend_r, comps_r = _fit_side(s, cfg, "right")

    j = np.arange(1, ext + 1)
    ramp = (ext - j) / ext  # 1 at the join, 0 at the far end (excluded)
    t_left = t[0] - j / fs
    t_right = t[-1] + j / fs
    off_l = s.samples[0] - _evaluate(trend_l, comps_l, t[:1], t[0])[0]
    off_r = s.samples[-1] - _evaluate(trend_r, comps_r, t[-1:], t[-1])[0]
    left = _evaluate(trend_l, comps_l, t_left, t[0]) + off_l * ramp
    right = _evaluate(trend_r, comps_r, t_right, t[-1]) + off_r * ramp
    m = int(cfg.closure_frac * ext)
    if m > 0:
        target = 0.5 * (left[-1] + right[-1])
        fade = 0.5 - 0.5 * np.cos(np.pi * np.arange(1, m + 1) / m)
        left[-m:] += fade * (target - left[-m:])
        right[-m:] += fade * (target - right[-m:])

    extended = Signal(np.concatenate([left[::-1], s.samples, right]), fs, s.t0_s - ext / fs)
    return Elongation(extended, s, ext, ext, trend_l, trend_r, comps_l, comps_r,
                      float(off_l), float(off_r))


def crop_result(result: DecompositionResult, start: int, n: int,
                original: Signal) -> DecompositionResult:
    """Restrict every mode and the residual to samples ``[start, start + n)``."""
    res_full = result.residual_signal().samples
    modes = []
    for m in result.modes:
        if len(m.time) != res_full.size:
            raise InvalidInputError("mode length differs from residual length")
        piece = Signal(m.time.samples[start:start + n], original.sample_rate_hz, original.t0_s)
        modes.append(Mode.from_signal(piece, m.iterations_used))
    res_t = res_full[start:start + n]
    if res_t.size != n:
        raise InvalidInputError("crop window exceeds the decomposed record")
    residual = analytic_spectrum(Signal(res_t, original.sample_rate_hz, original.t0_s))
    spectrum = analytic_spectrum(original)
    cropped = DecompositionResult(modes, residual, list(result.traces), spectrum.power,
                                  spectrum, original.t0_s, result.verdict)
    err = cropped.conservation_error()
    if err > 1e-9:
        raise SvmdError(f"cropped result does not add up to the input (rel. error {err:.3g})")
    return cropped


def truncate(result: DecompositionResult, e: Elongation) -> DecompositionResult:
    """Crop a result computed on ``e.extended`` back to the original record."""
    if result.residual.n_time != len(e.extended):
        raise InvalidInputError(
            f"result covers {result.residual.n_time} samples, elongation has {len(e.extended)}")
    if e.left_len == 0 and e.right_len == 0:
        return result
    return crop_result(result, e.left_len, e.n_time, e.original)
