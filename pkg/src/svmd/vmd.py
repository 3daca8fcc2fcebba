"""Fixed-K variational mode decomposition, used as a baseline.

All K modes are updated together (Gauss-Seidel sweeps) with the Wiener
filter ``(f - sum of the other modes) / (1 + 2 alpha (nu - nu_k)^2)`` where
``nu`` is frequency in cycles per sample, followed by a power-weighted
center update.  There is no Lagrange multiplier, so the modes need not add
up to the input; the difference is returned as the residual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DecompositionResult, ExtractionTrace, Mode, TraceRecord, init_from_peaks
from .exceptions import DegenerateSpectrumError, InvalidInputError, NoPeakError
from .spectral import Signal, _center, analytic_spectrum

VMD_INITS = ("uniform", "peaks")


@dataclass(frozen=True)
class VmdConfig:
    k_modes: int = 3
    alpha: float = 5000.0
    eta_inner: float = 1e-7
    max_iter: int = 500
    mirror_ends: bool = True
    mirror_frac: float = 0.5
    init: str = "peaks"

    def __post_init__(self):
        if self.k_modes < 1:
            raise InvalidInputError("k_modes must be >= 1")
        if not (self.alpha > 0 and self.eta_inner > 0):
            raise InvalidInputError("alpha and eta_inner must be positive")
        if self.max_iter < 1:
            raise InvalidInputError("max_iter must be >= 1")
        if not 0 < self.mirror_frac <= 1:
            raise InvalidInputError("mirror_frac must lie in (0, 1]")
        if self.init not in VMD_INITS:
            raise InvalidInputError(f"unknown init {self.init!r}")


def mirror_extend(s: Signal, frac: float) -> Signal:
    """Reflect ``ceil(frac * n)`` samples about each end sample."""
    if not 0 < frac <= 1:
        raise InvalidInputError("frac must lie in (0, 1]")
    n = len(s)
    m = math.ceil(frac * n)
    if m > n - 1:
        raise InvalidInputError(f"cannot mirror {m} samples of a {n}-sample record")
    x = np.pad(s.samples, m, mode="reflect")
    return Signal(x, s.sample_rate_hz, s.t0_s - m / s.sample_rate_hz)


def _initial_centers(h, cfg):
    fs = h.sample_rate_hz
    if cfg.init == "uniform":
        return [0.5 * fs * i / cfg.k_modes for i in range(cfg.k_modes)]
    centers, residual = [], h
    for _ in range(cfg.k_modes):
        try:
            imp = init_from_peaks(residual, centers)
        except NoPeakError:
            break
        k = int(np.flatnonzero(imp.bins)[0])
        centers.append(float(h.freqs[k]))
    while len(centers) < cfg.k_modes:
        centers.append(0.5 * fs * len(centers) / cfg.k_modes)
    return centers


def vmd_decompose(s: Signal, cfg: VmdConfig = VmdConfig()) -> DecompositionResult:
    """Decompose ``s`` into exactly ``cfg.k_modes`` modes.

    With ``mirror_ends`` the solve runs on the mirrored record and the modes
    are cropped back to the original samples afterwards.
    """
    if not np.any(s.samples):
        raise InvalidInputError("signal is identically zero")
    x = mirror_extend(s, cfg.mirror_frac) if cfg.mirror_ends else s
    start = round((s.t0_s - x.t0_s) * s.sample_rate_hz)
    h = analytic_spectrum(x)
    if h.power <= 0:
        raise DegenerateSpectrumError("input has zero power")
    f = h.bins
    nu = h.freqs / h.sample_rate_hz
    fs = h.sample_rate_hz
    centers = _initial_centers(h, cfg)
    u = np.zeros((cfg.k_modes, f.size), dtype=complex)
    traces = [ExtractionTrace() for _ in range(cfg.k_modes)]
    for _ in range(cfg.max_iter):
        change = 0.0
        total = u.sum(axis=0)
        for k in range(cfg.k_modes):
            others = total - u[k]
            new = (f - others) / (1.0 + 2.0 * cfg.alpha * (nu - centers[k] / fs) ** 2)
            p_old = np.sum(np.abs(u[k]) ** 2)
            diff = np.sum(np.abs(new - u[k]) ** 2)
            change += diff / p_old if p_old > 0 else math.inf
            u[k] = new
            total = others + new
            if np.any(new):
                centers[k] = _center(new, h.freqs)
            traces[k].records.append(TraceRecord(centers[k], float("nan"), float(diff)))
        if change <= cfg.eta_inner:
            for tr in traces:
                tr.converged = True
            break

    n = len(s)
    modes = []
    for k in range(cfg.k_modes):
        full = h.with_bins(u[k])
        m = Mode.from_spectrum(full, traces[k].iterations, x.t0_s)
        piece = Signal(m.time.samples[start:start + n], s.sample_rate_hz, s.t0_s)
        modes.append(Mode.from_signal(piece, traces[k].iterations))
    spectrum = analytic_spectrum(s)
    residual = spectrum
    for m in modes:
        residual = residual - m.spectrum
    return DecompositionResult(modes, residual, traces, spectrum.power, spectrum, s.t0_s)
