"""One-sided analytic spectra of real signals.

Conventions
-----------
The forward transform is the unnormalised DFT, the inverse carries the 1/N
factor (numpy's default).  The analytic spectrum keeps only the bins
``0 .. N//2``: strictly positive frequencies are doubled, DC and (for even N)
the Nyquist bin keep unit weight.  With this convention

    inverse_to_time(analytic_spectrum(s)) == s

up to rounding, and the analytic signal ``z = ifft(full_spectrum)`` satisfies
``sum |z|**2 == sum |bins|**2 / N``.

Frequencies are expressed in Hz throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateSpectrumError, InvalidInputError

MIN_LENGTH = 4


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real time series."""

    samples: np.ndarray
    sample_rate_hz: float
    t0_s: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise InvalidInputError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("samples contain non-finite values")
        if not (np.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise InvalidInputError(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "t0_s", float(self.t0_s))

    def __len__(self):
        return self.samples.size

    @property
    def time(self) -> np.ndarray:
        return self.t0_s + np.arange(self.samples.size) / self.sample_rate_hz

    def scaled(self, c: float) -> "Signal":
        return Signal(c * self.samples, self.sample_rate_hz, self.t0_s)


@dataclass(frozen=True, eq=False)
class HalfSpectrum:
    """Non-negative-frequency bins of an analytic spectrum.

    ``bins[k]`` sits at ``k * df_hz`` for ``k = 0 .. n_time // 2``.
    """

    bins: np.ndarray
    df_hz: float
    n_time: int

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=complex)
        n = int(self.n_time)
        if n < 1:
            raise InvalidInputError("n_time must be positive")
        if b.ndim != 1 or b.size != n // 2 + 1:
            raise InvalidInputError(
                f"expected {n // 2 + 1} bins for n_time={n}, got shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise InvalidInputError("spectrum contains non-finite bins")
        if not (np.isfinite(self.df_hz) and self.df_hz > 0):
            raise InvalidInputError("df_hz must be positive")
        object.__setattr__(self, "bins", b)
        object.__setattr__(self, "n_time", n)
        object.__setattr__(self, "df_hz", float(self.df_hz))

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(self.bins.size) * self.df_hz

    @property
    def sample_rate_hz(self) -> float:
        return self.df_hz * self.n_time

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.bins) ** 2))

    def with_bins(self, bins) -> "HalfSpectrum":
        return HalfSpectrum(bins, self.df_hz, self.n_time)

    def __add__(self, other: "HalfSpectrum") -> "HalfSpectrum":
        _check_compatible(self, other)
        return self.with_bins(self.bins + other.bins)

    def __sub__(self, other: "HalfSpectrum") -> "HalfSpectrum":
        _check_compatible(self, other)
        return self.with_bins(self.bins - other.bins)

    def __mul__(self, c) -> "HalfSpectrum":
        return self.with_bins(self.bins * c)

    __rmul__ = __mul__


def _check_compatible(a: HalfSpectrum, b: HalfSpectrum):
    if a.n_time != b.n_time or not np.isclose(a.df_hz, b.df_hz, rtol=1e-12, atol=0):
        raise InvalidInputError("spectra live on different frequency grids")


def _doubling_slice(n: int) -> slice:
    # strictly positive frequencies below Nyquist
    return slice(1, (n + 1) // 2)


def analytic_spectrum(s: Signal) -> HalfSpectrum:
    """Half spectrum of the analytic signal of ``s``.

    Raises
    ------
    InvalidInputError
        If the signal has fewer than four samples.
    """
    n = len(s)
    if n < MIN_LENGTH:
        raise InvalidInputError(f"need at least {MIN_LENGTH} samples, got {n}")
    bins = np.fft.rfft(s.samples)
    bins[_doubling_slice(n)] *= 2.0
    return HalfSpectrum(bins, s.sample_rate_hz / n, n)


def inverse_to_time(h: HalfSpectrum, t0_s: float = 0.0) -> Signal:
    """Real part of the inverse DFT of the zero-padded analytic spectrum."""
    n = h.n_time
    if h.bins.size != n // 2 + 1:
        raise InvalidInputError("bin count inconsistent with n_time")
    # Re{ifft(Z)} with Z zero on negative frequencies is irfft of Z with the
    # doubled bins halved back (imaginary parts of DC/Nyquist drop out in both).
    b = h.bins.copy()
    b[_doubling_slice(n)] *= 0.5
    return Signal(np.fft.irfft(b, n), h.sample_rate_hz, t0_s)


def full_spectrum(h: HalfSpectrum) -> np.ndarray:
    """Two-sided length-N spectrum of the analytic signal (negatives zero)."""
    z = np.zeros(h.n_time, dtype=complex)
    z[: h.bins.size] = h.bins
    return z


def analytic_signal(h: HalfSpectrum) -> np.ndarray:
    """Complex analytic signal in the time domain."""
    return np.fft.ifft(full_spectrum(h))


def center_frequency(h: HalfSpectrum) -> float:
    """Power-weighted mean frequency (Hz) of a half spectrum."""
    return _center(h.bins, h.freqs)


def _center(bins: np.ndarray, freqs: np.ndarray) -> float:
    p = bins.real ** 2 + bins.imag ** 2
    total = p.sum()
    if total <= 0.0:
        raise DegenerateSpectrumError("center frequency of an all-zero spectrum")
    return float(np.dot(freqs, p) / total)
