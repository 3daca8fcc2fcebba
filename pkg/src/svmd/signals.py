"""Synthetic test mixtures.

All four mixtures live on ``t = k / 5000`` for ``k = 0 .. 4999`` (one second
at 5 kHz, right end excluded) and carry additive white Gaussian noise drawn
from a Philox counter-based generator, so a given ``(id, sigma, seed)``
always reproduces the same samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError
from .spectral import Signal

SAMPLE_RATE_HZ = 5000.0
N_SAMPLES = 5000
SIGNAL_IDS = (1, 2, 3, 4)


@dataclass(frozen=True, eq=False)
class BenchSignal:
    mixture: Signal
    true_modes: tuple
    noise: np.ndarray
    noise_sigma: float
    seed: int
    signal_id: int = 0


def time_axis(n: int = N_SAMPLES, fs: float = SAMPLE_RATE_HZ) -> np.ndarray:
    return np.arange(n) / fs


def components(signal_id: int, t: np.ndarray) -> list:
    """Noise-free components of a mixture evaluated at times ``t`` (s)."""
    pi = np.pi
    if signal_id == 1:
        return [
            2 * t,
            np.sin(100 * pi * t - 10 * pi * t ** 2),
            0.5 * np.exp(-5 * (t - 0.5) ** 2) * np.sin(200 * pi * t),
        ]
    if signal_id == 2:
        return [
            5 * t ** 2,
            np.sin(100 * pi * t + 20 * pi * t ** 2),
            (1 - np.exp(-5 * (t - 0.5) ** 2)) * np.sin(200 * pi * t),
        ]
    if signal_id == 3:
        return [
            5 * (t - 0.5) ** 2,
            0.5 * np.sin(50 * pi * t + 10 * pi * t ** 2),
            0.3 * (1 + np.sin(5 * pi * t)) * np.sin(120 * pi * t),
        ]
    if signal_id == 4:
        first_half = t < 0.5
        return [
            2 * np.exp(-30 * (t - 0.5) ** 2),
            np.where(first_half, np.cos(160 * pi * t), 0.0),
            np.where(first_half, 0.0, np.cos(240 * pi * t)),
            (0.5 + 0.5 * t ** 2) * np.sin(100 * pi * t - 10 * pi * t ** 2),
        ]
    raise InvalidInputError(f"unknown signal id {signal_id!r}; expected one of {SIGNAL_IDS}")


def noise(n: int, sigma: float, seed: int) -> np.ndarray:
    if sigma < 0:
        raise InvalidInputError("sigma must be non-negative")
    if sigma == 0:
        return np.zeros(n)
    rng = np.random.Generator(np.random.Philox(seed))
    return sigma * rng.standard_normal(n)


def gen_signal(signal_id: int, sigma: float = 0.0, seed: int = 0) -> BenchSignal:
    """Build one of the four benchmark mixtures."""
    t = time_axis()
    parts = components(signal_id, t)
    eps = noise(t.size, sigma, seed)
    mixture = parts[0].copy()
    for p in parts[1:]:
        mixture = mixture + p
    mixture = mixture + eps
    return BenchSignal(
        mixture=Signal(mixture, SAMPLE_RATE_HZ),
        true_modes=tuple(Signal(p, SAMPLE_RATE_HZ) for p in parts),
        noise=eps,
        noise_sigma=float(sigma),
        seed=int(seed),
        signal_id=int(signal_id),
    )
