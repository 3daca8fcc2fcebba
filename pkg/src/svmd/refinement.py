"""Second extraction cycle, mode-count detection and merging.

Sequential extraction keeps going after the true modes are exhausted; the
components that follow are either noise, leftovers of an earlier mode, or
duplicates of one.  Two signals tell them apart: how similar a new
component's magnitude spectrum is to the earlier ones, and how far its
spectral peak stands above the noise floor.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import DecompositionResult, Mode, SvmdConfig, extract_one, impulse
from .exceptions import DegenerateSpectrumError, InvalidInputError
from .spectral import HalfSpectrum, Signal, analytic_spectrum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RefineConfig:
    """Refinement and detection settings.

    eps_refine
        Residual power (relative to the input) below which refinement is
        skipped altogether.
    merge_tol_hz
        Components whose centers are closer than this are merged.
    jump_threshold
        A new component whose minimum normalized distance to the earlier
        ones falls below this value is treated as a repeat.
    snr_stop
        A second-cycle component is only kept when its peak region stands
        this far above the noise floor.
    snr_detect
        Region SNR a first-cycle component needs to count as a mode.
    sharpen
        Factor applied to ``alpha`` when modes are re-extracted.
    region_hz
        Half width of the peak region used for SNR estimates.
    min_power_frac
        A component weaker than this fraction of the strongest one only
        counts when it lies within ``merge_tol_hz`` of a stronger component;
        this rejects small isolated artifacts in noiseless records, where
        every SNR is huge.
    max_passes
        Upper bound on the repeated residual searches during refinement.
    """

    eps_refine: float = 1e-4
    merge_tol_hz: float = 15.0
    jump_threshold: float = 0.3
    snr_stop: float = 3.0
    snr_detect: float = 100.0
    sharpen: float = 3.0
    region_hz: float = 5.0
    min_power_frac: float = 0.01
    max_passes: int = 10

    def __post_init__(self):
        for name in ("eps_refine", "merge_tol_hz", "snr_stop", "snr_detect",
                     "sharpen", "region_hz"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if not 0 < self.jump_threshold < 1:
            raise InvalidInputError("jump_threshold must lie in (0, 1)")
        if self.max_passes < 0:
            raise InvalidInputError("max_passes must be non-negative")
        if not 0 <= self.min_power_frac < 1:
            raise InvalidInputError("min_power_frac must lie in [0, 1)")


@dataclass(frozen=True)
class ModeCountVerdict:
    """Outcome of mode-count detection.

    ``distance_series[i]`` is the minimum normalized distance of component
    ``i + 1`` to all components before it.  ``groups`` lists, per detected
    mode, the indices of the components it is made of; ``snr_series`` is
    empty when no noise floor was available.
    """

    count: int
    distance_series: tuple
    snr_series: tuple = ()
    groups: tuple = ()


def _spec(x) -> HalfSpectrum:
    return x.spectrum if isinstance(x, Mode) else x


def normalized_distance(a, b) -> float:
    """Distance between unit-energy magnitude spectra, in ``[0, 2]``."""
    pa = np.abs(_spec(a).bins)
    pb = np.abs(_spec(b).bins)
    if pa.shape != pb.shape:
        raise InvalidInputError("spectra live on different grids")
    na, nb = np.linalg.norm(pa), np.linalg.norm(pb)
    if na == 0 or nb == 0:
        raise DegenerateSpectrumError("zero-power mode has no spectral shape")
    return float(np.linalg.norm(pa / na - pb / nb))


def distance_series(modes: Sequence) -> tuple:
    return tuple(min(normalized_distance(modes[i], modes[j]) for j in range(i))
                 for i in range(1, len(modes)))


def detect_mode_count(modes: Sequence, cfg: RefineConfig = RefineConfig()) -> ModeCountVerdict:
    """Count modes up to the first component that repeats an earlier one."""
    if len(modes) == 0:
        raise InvalidInputError("need at least one mode")
    dist = distance_series(modes)
    count = len(modes)
    for i, d in enumerate(dist):
        if d < cfg.jump_threshold:
            count = i + 1
            break
    return ModeCountVerdict(count, dist, (), tuple((i,) for i in range(count)))


def noise_floor(h: HalfSpectrum) -> float:
    """Mean bin power of the noise, from the median bin power.

    For complex Gaussian noise the bin power is exponential, whose median
    is ``ln 2`` times its mean.  Sparse spectra leave most bins at the noise
    level, so the median is barely moved by the signal.
    """
    return float(np.median(np.abs(h.bins) ** 2) / math.log(2))


def region_snr(h, floor: float, half_width_hz: float = 5.0) -> float:
    """Mean power within ``half_width_hz`` of the peak bin over ``floor``."""
    h = _spec(h)
    p = np.abs(h.bins) ** 2
    k = int(np.argmax(p))
    w = int(round(half_width_hz / h.df_hz))
    region = p[max(k - w, 0):k + w + 1].mean()
    if floor <= 0:
        return math.inf if region > 0 else 0.0
    return float(region / floor)


def _cluster(centers, powers, idx, tol):
    """Greedy clusters of ``idx``: strongest unassigned member anchors the next."""
    left = sorted(idx, key=lambda i: -powers[i])
    groups = []
    while left:
        anchor = left[0]
        members = [i for i in left if abs(centers[i] - centers[anchor]) <= tol]
        groups.append(sorted(members))
        left = [i for i in left if i not in members]
    return sorted(groups, key=lambda g: g[0])


def _sum_group(modes, group, t0_s):
    h = modes[group[0]].spectrum
    for i in group[1:]:
        h = h + modes[i].spectrum
    return Mode.from_spectrum(h, sum(modes[i].iterations_used for i in group), t0_s)


def merge_groups(modes: Sequence[Mode], tol_hz: float) -> list:
    """Index groups of ``modes`` after merging to a fixed point."""
    groups = [[i] for i in range(len(modes))]
    current = list(modes)
    while True:
        centers = [m.center_hz for m in current]
        powers = [m.power for m in current]
        new = _cluster(centers, powers, range(len(current)), tol_hz)
        if len(new) == len(current):
            return groups
        groups = [sorted(i for j in g for i in groups[j]) for g in new]
        groups.sort(key=lambda g: g[0])
        current = [_sum_group(modes, g, modes[g[0]].time.t0_s) for g in groups]


def merge_modes(modes: Sequence[Mode], cfg: RefineConfig = RefineConfig()) -> list:
    """Merge components with nearby centers by summing their spectra.

    Clusters are anchored at the strongest remaining component; merging is
    repeated until no two centers are within ``merge_tol_hz``, so applying
    it twice changes nothing.  Output keeps the order of first members.
    """
    if not modes:
        return []
    groups = merge_groups(modes, cfg.merge_tol_hz)
    out = []
    for g in groups:
        out.append(modes[g[0]] if len(g) == 1 else _sum_group(modes, g, modes[g[0]].time.t0_s))
    return out


def assess_modes(modes: Sequence[Mode], floor: Optional[float],
                 cfg: RefineConfig = RefineConfig()) -> ModeCountVerdict:
    """Mode count from repeats, significance and merging combined.

    Components after the first repeat are ignored; of the rest, those whose
    region SNR reaches ``snr_detect`` are clustered by center and each
    cluster counts once.  Components below ``min_power_frac`` of the
    strongest are dropped unless a stronger one sits within
    ``merge_tol_hz``.  The strongest component always counts.
    """
    if len(modes) == 0:
        raise InvalidInputError("need at least one mode")
    base = detect_mode_count(modes, cfg)
    head = list(range(base.count))
    if floor is None:
        snr = ()
        keep = head
    else:
        snr = tuple(region_snr(m, floor, cfg.region_hz) for m in modes)
        keep = [i for i in head if snr[i] >= cfg.snr_detect]
        if not keep:
            keep = [max(head, key=lambda i: modes[i].power)]
    top = max(modes[i].power for i in keep)
    strong = [i for i in keep if modes[i].power >= cfg.min_power_frac * top]
    # a faint component only counts as part of a strong one nearby
    keep = [i for i in keep if i in strong or any(
        abs(modes[i].center_hz - modes[j].center_hz) <= cfg.merge_tol_hz for j in strong)]
    sub = [modes[i] for i in keep]
    groups = tuple(tuple(keep[j] for j in g) for g in merge_groups(sub, cfg.merge_tol_hz))
    return ModeCountVerdict(len(groups), base.distance_series, snr, groups)


def regroup(result: DecompositionResult, groups: Sequence[Sequence[int]]) -> DecompositionResult:
    """Keep only the grouped components, summing each group; the rest goes
    back into the residual."""
    modes = result.modes
    t0 = result.t0_s
    kept = [_sum_group(modes, list(g), t0) for g in groups]
    used = {i for g in groups for i in g}
    residual = result.residual
    for i, m in enumerate(modes):
        if i not in used:
            residual = residual + m.spectrum
    traces = [result.traces[g[0]] for g in groups]
    return DecompositionResult(kept, residual, traces, result.input_power,
                               result.input_spectrum, t0, result.verdict)


def refine(s: Signal, first: DecompositionResult, cfg_svmd: SvmdConfig = SvmdConfig(),
           cfg_ref: RefineConfig = RefineConfig(),
           floor: Optional[float] = None) -> DecompositionResult:
    """Second cycle over a first-cycle result.

    Each mode is re-extracted, with ``alpha`` sharpened, from itself plus the
    current residual, starting at its own center.  The residual is then
    searched again at every mode's center; a component found there is
    merged into that mode when its peak region clears ``snr_stop``, its
    center lies within ``merge_tol_hz`` and it carries more than
    ``eps_refine`` of the input power.  The search repeats, up to
    ``max_passes`` times, until a pass adds nothing.  Nothing happens at all
    when the residual holds less than ``eps_refine`` of the input power.
    """
    if first.residual.n_time != len(s):
        raise InvalidInputError("first-cycle result does not match the signal")
    spectrum = first.input_spectrum if first.input_spectrum is not None else analytic_spectrum(s)
    if first.residual.n_time != spectrum.n_time:
        raise InvalidInputError("first-cycle result does not match the signal")
    if not first.modes or first.residual.power <= cfg_ref.eps_refine * spectrum.power:
        return first
    if floor is None:
        floor = noise_floor(spectrum)
    sharp = dataclasses.replace(cfg_svmd, alpha=cfg_svmd.alpha * cfg_ref.sharpen)
    t0 = first.t0_s
    modes = list(first.modes)
    traces = list(first.traces)
    residual = first.residual
    top = max(m.power for m in modes)
    for i, m in enumerate(modes):
        if m.power < cfg_ref.min_power_frac * top:
            # faint pieces are left alone; re-extracting them mostly adds noise
            continue
        pool = residual + m.spectrum
        new, trace = extract_one(pool, impulse(pool, m.center_hz), sharp, t0)
        new = dataclasses.replace(new, iterations_used=m.iterations_used + new.iterations_used)
        modes[i] = new
        traces[i] = trace
        residual = pool - new.spectrum
    floor_power = cfg_ref.eps_refine * spectrum.power
    for _ in range(cfg_ref.max_passes):
        added = False
        for i, m in enumerate(modes):
            if residual.power <= floor_power:
                break
            extra, _ = extract_one(residual, impulse(residual, m.center_hz), sharp, t0)
            if abs(extra.center_hz - m.center_hz) > cfg_ref.merge_tol_hz:
                continue
            if extra.power <= floor_power:
                continue
            if region_snr(extra, floor, cfg_ref.region_hz) < cfg_ref.snr_stop:
                logger.debug("second cycle at %.1f Hz below snr_stop", m.center_hz)
                continue
            modes[i] = Mode.from_spectrum(m.spectrum + extra.spectrum,
                                          m.iterations_used + extra.iterations_used, t0)
            residual = residual - extra.spectrum
            added = True
        if not added:
            break
    return DecompositionResult(modes, residual, traces, first.input_power, spectrum,
                               t0, first.verdict)
