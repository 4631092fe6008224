"""Mel analysis front-end and the (audition-only) inverse.

Framing convention: frame k covers samples [k*hop, k*hop + n_fft), the tail
is reflect-padded so a clip of N samples yields exactly N // hop frames.
This makes mel frames, pitch-tracker frames, and synthesis frames line up
one-to-one and makes the transform shift-equivariant by whole hops.
"""

from __future__ import annotations

import functools

import numpy as np

from pitchcodec.dsp.types import AnalysisConfig, AudioClip, MelSpectrogram
from pitchcodec.errors import DataError


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@functools.lru_cache(maxsize=8)
def _filterbank_cached(n_mels: int, n_fft: int, sample_rate: int,
                       fmin: float, fmax: float) -> np.ndarray:
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    mel_edges = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_edges = mel_to_hz(mel_edges)
    fb = np.zeros((n_mels, len(freqs)))
    for m in range(n_mels):
        lo, center, hi = hz_edges[m], hz_edges[m + 1], hz_edges[m + 2]
        rising = (freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - freqs) / max(hi - center, 1e-12)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return fb


def mel_filterbank(cfg: AnalysisConfig) -> np.ndarray:
    """Triangular (peak-1) filterbank, shape (n_mels, n_fft//2 + 1)."""
    return _filterbank_cached(cfg.n_mels, cfg.n_fft, cfg.sample_rate,
                              cfg.mel_fmin, cfg.fmax)


def mel_bin_centers_hz(cfg: AnalysisConfig) -> np.ndarray:
    """Center frequency (Hz) of each mel bin."""
    mel_edges = np.linspace(hz_to_mel(cfg.mel_fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    return mel_to_hz(mel_edges[1:-1])


def frame_signal(x: np.ndarray, cfg: AnalysisConfig) -> np.ndarray:
    """Slice a waveform into (n_frames, n_fft) with tail reflect padding."""
    n_frames = cfg.n_frames(len(x))
    if n_frames < 1:
        raise DataError(
            f"clip of {len(x)} samples is shorter than one hop ({cfg.hop})"
        )
    pad = cfg.n_fft - cfg.hop
    padded = np.concatenate([x, x[-2:-pad - 2:-1]]) if pad > 0 else x
    idx = np.arange(cfg.n_fft)[None, :] + cfg.hop * np.arange(n_frames)[:, None]
    return padded[idx]


def stft_magnitude(clip: AudioClip, cfg: AnalysisConfig) -> np.ndarray:
    if len(clip.samples) < cfg.n_fft:
        raise DataError(
            f"clip of {len(clip.samples)} samples is shorter than one "
            f"analysis window ({cfg.n_fft})"
        )
    frames = frame_signal(clip.samples, cfg)
    window = np.hanning(cfg.n_fft + 1)[:-1]   # periodic Hann
    return np.abs(np.fft.rfft(frames * window, axis=1))


def compute_mel(clip: AudioClip, cfg: AnalysisConfig | None = None) -> MelSpectrogram:
    """Log mel-magnitude spectrogram with floor ``cfg.log_floor``."""
    cfg = cfg or AnalysisConfig()
    cfg.validate()
    mag = stft_magnitude(clip, cfg)
    mel = mag @ mel_filterbank(cfg).T
    values = np.log(np.maximum(mel, cfg.log_floor))
    return MelSpectrogram(values=values, frame_hop=cfg.hop, sample_rate=cfg.sample_rate)


def mel_to_linear(mel_values: np.ndarray, cfg: AnalysisConfig) -> np.ndarray:
    """Approximate linear-frequency magnitudes from log-mel via pseudo-inverse."""
    fb = mel_filterbank(cfg)
    pinv = np.linalg.pinv(fb)
    lin = np.exp(mel_values) @ pinv.T
    return np.maximum(lin, 0.0)


def mel_to_audio(mel: MelSpectrogram, cfg: AnalysisConfig | None = None,
                 n_iter: int = 32, seed: int = 0) -> AudioClip:
    """Phase-reconstruction inverse for audition only.

    Iterative phase estimation on the pseudo-inverse magnitudes; never used
    for metrics.
    """
    cfg = cfg or AnalysisConfig()
    mag = mel_to_linear(mel.values, cfg)
    rng = np.random.default_rng(seed)
    phase = np.exp(2j * np.pi * rng.random(mag.shape))
    window = np.hanning(cfg.n_fft + 1)[:-1]
    n_samples = mel.n_frames * cfg.hop

    def synthesize(spec_complex):
        frames = np.fft.irfft(spec_complex, n=cfg.n_fft, axis=1) * window
        out = np.zeros(n_samples + cfg.n_fft)
        norm = np.zeros(n_samples + cfg.n_fft)
        for k in range(mel.n_frames):
            out[k * cfg.hop: k * cfg.hop + cfg.n_fft] += frames[k]
            norm[k * cfg.hop: k * cfg.hop + cfg.n_fft] += window ** 2
        out /= np.maximum(norm, 1e-8)
        return out[:n_samples]

    spec = mag * phase
    for _ in range(n_iter):
        x = synthesize(spec)
        reanalyzed = np.fft.rfft(frame_signal(x, cfg) * window, axis=1)
        phase = reanalyzed / np.maximum(np.abs(reanalyzed), 1e-12)
        spec = mag * phase
    x = synthesize(spec)
    peak = np.max(np.abs(x))
    if peak > 0:
        x = 0.9 * x / peak
    return AudioClip(samples=x, sample_rate=cfg.sample_rate)
