"""Contour transforms: semitone shifting, flatten+shift, and unvoicing.

All transforms are pure; randomness comes in through an explicit generator.
The default perturbation range is DELTA_SEMITONES.
"""

from __future__ import annotations

import numpy as np

from pitchcodec.dsp.types import F0Contour
from pitchcodec.errors import DataError

DELTA_SEMITONES = 5.0


def semitone_shift(contour: F0Contour, s: float) -> F0Contour:
    """Multiply voiced F0 by 2**(s/12); flags are untouched."""
    out = contour.copy()
    out.f0_hz[out.voiced] *= 2.0 ** (s / 12.0)
    return out


def contour_mean_hz(contour: F0Contour, mode: str = "log") -> float:
    """Utterance-level mean over voiced frames.

    ``log`` (default) averages in log-frequency, i.e. the geometric mean in
    Hz, which is the consistent averaging space for semitone-valued shifts.
    ``linear`` is the arithmetic alternative kept as a config option.
    """
    voiced_f0 = contour.f0_hz[contour.voiced]
    if len(voiced_f0) == 0:
        raise DataError("contour has no voiced frames; mean undefined")
    if mode == "log":
        return float(np.exp(np.mean(np.log(voiced_f0))))
    if mode == "linear":
        return float(np.mean(voiced_f0))
    raise ValueError(f"unknown mean mode {mode!r}")


def flatten_and_shift(contour: F0Contour, delta: float = DELTA_SEMITONES,
                      rng: np.random.Generator | None = None,
                      shift_semitones: float | None = None,
                      mean_mode: str = "log") -> tuple[F0Contour, float]:
    """Replace every voiced frame by the utterance mean plus a random shift.

    The shift is drawn from U(-delta, delta) semitones unless
    ``shift_semitones`` pins it explicitly. Returns the transformed contour
    and the applied shift. Raises on all-unvoiced input (the mean is
    undefined there).
    """
    mean_hz = contour_mean_hz(contour, mean_mode)
    if shift_semitones is None:
        if rng is None:
            rng = np.random.default_rng()
        shift = float(rng.uniform(-delta, delta))
    else:
        shift = float(shift_semitones)
    out = contour.copy()
    out.f0_hz[out.voiced] = mean_hz * 2.0 ** (shift / 12.0)
    return out, shift


def unvoice_all(contour: F0Contour) -> F0Contour:
    """Mark every frame unvoiced with f0 = 0; ``missing`` is preserved."""
    n = len(contour)
    return F0Contour(f0_hz=np.zeros(n), voiced=np.zeros(n, dtype=bool),
                     missing=contour.missing.copy())
