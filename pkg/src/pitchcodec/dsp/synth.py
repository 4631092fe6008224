"""Oracle utterance synthesis: harmonic pulse train through formant resonators.

The voiced source is a phase-continuous pulse train (pulses placed with
two-tap fractional interpolation, so the period is accurate to well below a
sample); unvoiced frames are rendered as white noise. Both run through a
cascade of second-order resonators whose centers/bandwidths switch at
segment boundaries with filter state carried across, then the result is
peak-normalized to 0.9.

Because the noise stream is seeded from the spec and drawn for every sample
regardless of voicing, re-rendering the same spec with a replacement F0
contour is bit-deterministic and differs only where the contour differs.
"""

from __future__ import annotations

import numpy as np
from scipy import signal as sps

from pitchcodec.dsp.types import AnalysisConfig, AudioClip, F0Contour, UtteranceSpec
from pitchcodec.errors import ConfigurationError, DataError

NOISE_GAIN = 0.08        # unvoiced source level relative to unit pulses
PULSE_GAIN = 1.0


def _pulse_train(f0_per_sample: np.ndarray, voiced_per_sample: np.ndarray,
                 sample_rate: int) -> np.ndarray:
    """Fractionally-placed impulse train; phase frozen through unvoiced spans."""
    n = len(f0_per_sample)
    steps = f0_per_sample * voiced_per_sample / sample_rate
    phase = np.cumsum(steps)
    out = np.zeros(n + 2)
    n_pulses = int(np.floor(phase[-1])) if n else 0
    if n_pulses >= 1:
        marks = np.arange(1, n_pulses + 1, dtype=np.float64)
        idx = np.searchsorted(phase, marks)           # first sample with phase >= m
        # crossing sits (phase[idx] - m) / step[idx] of a sample before idx ends
        pos = idx - (phase[idx] - marks) / steps[idx]
        i0 = np.floor(pos).astype(int)
        alpha = pos - i0
        i0 = np.clip(i0, 0, n)
        np.add.at(out, i0, PULSE_GAIN * (1.0 - alpha))
        np.add.at(out, i0 + 1, PULSE_GAIN * alpha)
    return out[:n]


def _resonator_coeffs(center_hz: float, bandwidth_hz: float, sample_rate: int):
    r = np.exp(-np.pi * bandwidth_hz / sample_rate)
    omega = 2.0 * np.pi * center_hz / sample_rate
    b = np.array([1.0 - r])
    a = np.array([1.0, -2.0 * r * np.cos(omega), r * r])
    return b, a


def generate_utterance(spec: UtteranceSpec, sr: int = 16000,
                       frame_hop: int = 256) -> AudioClip:
    """Render an utterance spec to audio; deterministic given the spec."""
    spec.validate(sample_rate=sr)
    n_frames = spec.n_frames
    n_samples = n_frames * frame_hop

    f0 = np.repeat(spec.f0_track.f0_hz, frame_hop)
    voiced = np.repeat(spec.f0_track.voiced, frame_hop)

    source = _pulse_train(f0, voiced, sr)
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(n_samples)
    source = source + NOISE_GAIN * noise * (~voiced)

    # cascade resonators, coefficients switching per segment, state carried
    max_formants = max(len(f) for f in spec.formant_track)
    out = source
    for stage in range(max_formants):
        filtered = np.empty_like(out)
        zi = None
        for (start_f, end_f), formants in zip(spec.segment_runs(), spec.formant_track):
            center, bw = formants[stage % len(formants)]
            b, a = _resonator_coeffs(center, bw, sr)
            lo, hi = start_f * frame_hop, end_f * frame_hop
            if zi is None:
                zi = np.zeros(max(len(a), len(b)) - 1)
            filtered[lo:hi], zi = sps.lfilter(b, a, out[lo:hi], zi=zi)
        out = filtered

    peak = np.max(np.abs(out))
    if peak > 0:
        out = 0.9 * out / peak
    return AudioClip(samples=out, sample_rate=sr)


def resynthesize_with_f0(spec: UtteranceSpec, new_f0: F0Contour,
                         sr: int = 16000, frame_hop: int = 256) -> AudioClip:
    """Re-render the spec with a replacement contour (formants, labels, noise
    seed all unchanged)."""
    if len(new_f0) != spec.n_frames:
        raise DataError(
            f"replacement contour has {len(new_f0)} frames, spec has {spec.n_frames}"
        )
    return generate_utterance(spec.with_f0(new_f0), sr=sr, frame_hop=frame_hop)
