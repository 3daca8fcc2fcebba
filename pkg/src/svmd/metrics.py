"""Quality measures comparing a recovered mode against its ground truth."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateSpectrumError, InvalidInputError


def _pair(u, f):
    u = np.asarray(getattr(u, "samples", u), dtype=float)
    f = np.asarray(getattr(f, "samples", f), dtype=float)
    if u.shape != f.shape:
        raise InvalidInputError(f"length mismatch: {u.shape} vs {f.shape}")
    return u, f


def _norm(x):
    # scaled so tiny entries do not underflow when squared
    top = np.max(np.abs(x)) if x.size else 0.0
    if top == 0:
        return 0.0
    return top * float(np.linalg.norm(x / top))


def er(u, f) -> float:
    """Relative L2 error ``||u - f|| / ||f||``."""
    u, f = _pair(u, f)
    ref = _norm(f)
    if ref == 0:
        raise DegenerateSpectrumError("reference mode has zero norm")
    return float(_norm(u - f) / ref)


def em(u, f) -> float:
    """Largest absolute sample deviation."""
    u, f = _pair(u, f)
    return float(np.max(np.abs(u - f)))


def q_ee(u, f, end_frac: float = 0.02) -> float:
    """End-effect factor: mean |u - f| over both end regions over the whole-record mean.

    Each end region holds ``ceil(end_frac * n)`` samples.
    """
    if not 0 < end_frac < 0.5:
        raise InvalidInputError("end_frac must lie in (0, 0.5)")
    u, f = _pair(u, f)
    d = np.abs(u - f)
    m = math.ceil(end_frac * d.size)
    # exactly rounded sums keep a uniform deviation at exactly 1
    whole = math.fsum(d) / d.size
    if whole == 0:
        raise DegenerateSpectrumError("zero deviation everywhere; end-effect factor undefined")
    ends = math.fsum(d[:m]) + math.fsum(d[-m:])
    return float(ends / (2 * m) / whole)


@dataclass(frozen=True)
class QualityReport:
    er: float
    em: float
    q_ee: float
    d_c_hz: float

    def as_dict(self):
        return {"er": self.er, "em": self.em, "q_ee": self.q_ee, "d_c_hz": self.d_c_hz}


def quality(u, f, center_hz: float = math.nan, true_center_hz: float = math.nan,
            end_frac: float = 0.02) -> QualityReport:
    try:
        qe = q_ee(u, f, end_frac)
    except DegenerateSpectrumError:
        qe = math.nan
    return QualityReport(er(u, f), em(u, f), qe, center_hz - true_center_hz)
