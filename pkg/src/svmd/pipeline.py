"""End-to-end decomposition: elongate, extract, count, refine, crop."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import DecompositionResult, SvmdConfig, decompose_spectrum
from .elongation import Elongation, PcrConfig, elongate, truncate
from .exceptions import InvalidInputError
from .refinement import (
    ModeCountVerdict,
    RefineConfig,
    assess_modes,
    noise_floor,
    refine,
    regroup,
)
from .spectral import Signal, analytic_spectrum

logger = logging.getLogger(__name__)

DEFAULT_PCR = PcrConfig(closure_frac=0.8)


@dataclass(frozen=True)
class PipelineConfig:
    svmd: SvmdConfig = field(default_factory=SvmdConfig)
    pcr: PcrConfig = DEFAULT_PCR
    refine: RefineConfig = field(default_factory=RefineConfig)
    do_elongate: bool = True
    do_refine: bool = True
    max_modes: int = 8

    def __post_init__(self):
        if self.max_modes < 1:
            raise InvalidInputError("max_modes must be >= 1")


@dataclass(eq=False)
class PipelineResult:
    """``result`` is final; ``first`` is the same modes before refinement.

    Both live on the original time grid.  ``over`` is the raw, uncounted
    first cycle on the (possibly extended) grid.
    """

    result: DecompositionResult
    first: DecompositionResult
    verdict: ModeCountVerdict
    elongation: Elongation
    over: DecompositionResult


def run_pipeline(s: Signal, cfg: PipelineConfig = PipelineConfig(),
                 init_hz: Optional[Sequence[float]] = None) -> PipelineResult:
    """Decompose ``s`` with automatic mode counting.

    The record is extended at both ends, over-extracted up to ``max_modes``
    components, and the components that pass detection are kept.  Groups of
    pieces belonging to one mode are refined piecewise and then summed; all
    other components are returned to the residual.  Everything is cropped
    back to the original samples at the end.
    """
    e = elongate(s, cfg.pcr) if cfg.do_elongate else Elongation(s, s, 0, 0)
    x = e.extended
    spectrum = analytic_spectrum(x)
    over = decompose_spectrum(spectrum, cfg.svmd, init_hz=init_hz, t0_s=x.t0_s,
                              max_modes=cfg.max_modes)
    if not over.modes:
        verdict = ModeCountVerdict(0, (), (), ())
        cropped = truncate(over, e)
        cropped.verdict = verdict
        return PipelineResult(cropped, cropped, verdict, e, over)

    floor = noise_floor(analytic_spectrum(s))
    verdict = assess_modes(truncate(over, e).modes, floor, cfg.refine)
    flat = sorted(i for g in verdict.groups for i in g)
    pieces = regroup(over, [(i,) for i in flat])
    pos = {i: k for k, i in enumerate(flat)}
    groups = [tuple(pos[i] for i in g) for g in verdict.groups]

    first = regroup(pieces, groups)
    final = first
    if cfg.do_refine:
        final = regroup(refine(x, pieces, cfg.svmd, cfg.refine, floor=floor), groups)
    first, final = truncate(first, e), truncate(final, e)
    first.verdict = final.verdict = verdict
    logger.debug("mode count %d, centers %s", verdict.count, final.centers_hz)
    return PipelineResult(final, first, verdict, e, over)
