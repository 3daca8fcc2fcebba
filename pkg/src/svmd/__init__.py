"""Sequential variational mode decomposition (SVMD).

Modes are pulled out of a signal's analytic spectrum one at a time, each by
a small fixed-point iteration, so the number of modes need not be known in
advance.  The package also carries end extension (PCR), mode-count
detection and refinement, a fixed-K VMD baseline, synthetic test signals
and the experiments that compare the two.
"""
from .core import (
    DecompositionResult,
    ExtractionTrace,
    Mode,
    SvmdConfig,
    decompose,
    decompose_spectrum,
    extract_one,
    impulse,
    init_from_peaks,
    update_mode,
)
from .elongation import Elongation, PcrConfig, elongate, extract_end_components, fit_end_trend, truncate
from .exceptions import DegenerateSpectrumError, InvalidInputError, NoPeakError, SvmdError
from .metrics import QualityReport, em, er, q_ee, quality
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .refinement import (
    ModeCountVerdict,
    RefineConfig,
    detect_mode_count,
    merge_modes,
    normalized_distance,
    refine,
)
from .signals import BenchSignal, gen_signal
from .spectral import HalfSpectrum, Signal, analytic_spectrum, center_frequency, inverse_to_time
from .vmd import VmdConfig, mirror_extend, vmd_decompose

__all__ = [name for name in dir() if not name.startswith("_")]
