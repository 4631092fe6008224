"""Pitch tracking.

Two trackers share one output type:

* ``estimate_f0`` — normalized-autocorrelation (NCCF) tracker on waveforms,
  frame-synchronous with the mel hop, parabolic peak refinement.
* ``estimate_f0_from_mel`` — harmonic-comb tracker on (possibly generated)
  log-mel matrices, used where no waveform exists.

Amplitude scaling leaves NCCF untouched, so voicing decisions and F0 are
scale-invariant by construction.
"""

from __future__ import annotations

import functools

import numpy as np

from pitchcodec.dsp.mel import mel_filterbank
from pitchcodec.dsp.types import AnalysisConfig, AudioClip, F0Contour, MelSpectrogram
from pitchcodec.errors import ConfigurationError

VOICING_THRESHOLD = 0.5          # NCCF peak height for a voiced decision
PEAK_TOLERANCE = 0.92            # accept earliest peak within this factor of the max
ENERGY_FLOOR = 1e-6              # RMS below this is silence

MEL_VOICING_THRESHOLD = 2.0      # comb-to-background energy ratio
MEL_GRID_STEP_SEMITONES = 0.05
MEL_MAX_HARMONIC_HZ = 3500.0
MEL_MAX_HARMONICS = 12


def _parabolic_refine(y_prev: np.ndarray, y_peak: np.ndarray, y_next: np.ndarray) -> np.ndarray:
    """Sub-sample offset of a parabola through three points, clipped to [-1, 1]."""
    denom = y_prev - 2.0 * y_peak + y_next
    offset = np.where(np.abs(denom) > 1e-12, 0.5 * (y_prev - y_next) / np.where(denom == 0, 1, denom), 0.0)
    return np.clip(offset, -1.0, 1.0)


def _nccf(frames: np.ndarray, lag_min: int, lag_max: int) -> np.ndarray:
    """Normalized cross-correlation per frame for lags [lag_min, lag_max]."""
    n_frames, width = frames.shape
    frames = frames - frames.mean(axis=1, keepdims=True)
    fft_len = 1 << int(np.ceil(np.log2(width + lag_max + 1)))
    spec = np.fft.rfft(frames, n=fft_len, axis=1)
    autocorr = np.fft.irfft(spec * np.conj(spec), n=fft_len, axis=1)[:, : lag_max + 1]

    sq = np.concatenate([np.zeros((n_frames, 1)), np.cumsum(frames ** 2, axis=1)], axis=1)
    lags = np.arange(lag_min, lag_max + 1)
    # energy of x[0 : W-lag] and of x[lag : W]
    e_head = sq[:, width - lags] - sq[:, [0]]
    e_tail = sq[:, [width]] - sq[:, lags]
    denom = np.sqrt(np.maximum(e_head * e_tail, 1e-30))
    return autocorr[:, lag_min: lag_max + 1] / denom


def estimate_f0(clip: AudioClip, fmin: float = 50.0, fmax: float = 500.0,
                cfg: AnalysisConfig | None = None,
                voicing_threshold: float = VOICING_THRESHOLD) -> F0Contour:
    """Track F0 per analysis frame; unvoiced frames carry f0 = 0.

    The ``missing`` flag is never set by the tracker.
    """
    cfg = cfg or AnalysisConfig()
    if not (0 < fmin < fmax):
        raise ConfigurationError("need 0 < fmin < fmax")
    if fmax >= cfg.sample_rate / 4:
        raise ConfigurationError("fmax must stay below a quarter of the sample rate")

    from pitchcodec.dsp.mel import frame_signal   # shared framing
    frames = frame_signal(np.asarray(clip.samples, dtype=np.float64), cfg)
    lag_min = max(2, int(np.floor(cfg.sample_rate / fmax)))
    lag_max = int(np.ceil(cfg.sample_rate / fmin))
    lag_max = min(lag_max, frames.shape[1] - 2)

    nccf = _nccf(frames, lag_min, lag_max)
    n_frames, n_lags = nccf.shape

    rms = np.sqrt(np.mean(frames ** 2, axis=1))
    f0 = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)

    interior = nccf[:, 1:-1]
    is_peak = (interior >= nccf[:, :-2]) & (interior >= nccf[:, 2:])
    best = nccf.max(axis=1)

    for i in range(n_frames):
        if rms[i] < ENERGY_FLOOR or best[i] < voicing_threshold:
            continue
        peaks = np.flatnonzero(is_peak[i]) + 1
        if len(peaks) == 0:
            continue
        strong = peaks[nccf[i, peaks] >= PEAK_TOLERANCE * best[i]]
        j = int(strong[0]) if len(strong) else int(np.argmax(nccf[i]))
        if 0 < j < n_lags - 1:
            offset = float(_parabolic_refine(nccf[i, j - 1], nccf[i, j], nccf[i, j + 1]))
        else:
            offset = 0.0
        lag = lag_min + j + offset
        candidate = cfg.sample_rate / lag
        if fmin <= candidate <= fmax:
            f0[i] = candidate
            voiced[i] = True
    return F0Contour(f0_hz=f0, voiced=voiced)


# ---------------------------------------------------------------------------
# mel-domain tracker


@functools.lru_cache(maxsize=8)
def _comb_tables(n_mels: int, n_fft: int, sample_rate: int, mel_fmin: float,
                 mel_fmax: float, fmin: float, fmax: float):
    """Precomputed candidate grid and harmonic/gap gather indices."""
    cfg = AnalysisConfig(sample_rate=sample_rate, n_fft=n_fft, n_mels=n_mels,
                         mel_fmin=mel_fmin, mel_fmax=mel_fmax)
    pinv = np.linalg.pinv(mel_filterbank(cfg))
    n_grid = int(np.ceil(12 * np.log2(fmax / fmin) / MEL_GRID_STEP_SEMITONES)) + 1
    candidates = fmin * 2.0 ** (np.arange(n_grid) * MEL_GRID_STEP_SEMITONES / 12.0)
    df = sample_rate / n_fft
    n_bins = n_fft // 2 + 1

    harmonics = np.arange(1, MEL_MAX_HARMONICS + 1)
    comb_hz = candidates[:, None] * harmonics[None, :]
    gap_hz = candidates[:, None] * (harmonics[None, :] + 0.5)
    usable = comb_hz <= MEL_MAX_HARMONIC_HZ
    comb_idx = np.clip(np.rint(comb_hz / df).astype(int), 0, n_bins - 1)
    gap_idx = np.clip(np.rint(gap_hz / df).astype(int), 0, n_bins - 1)
    band = int(MEL_MAX_HARMONIC_HZ / df)
    return pinv, candidates, comb_idx, gap_idx, usable, band


def estimate_f0_from_mel(mel: MelSpectrogram, fmin: float = 50.0, fmax: float = 500.0,
                         cfg: AnalysisConfig | None = None,
                         voicing_threshold: float = MEL_VOICING_THRESHOLD) -> F0Contour:
    """Comb-filter F0 tracker on a log-mel matrix.

    Scores each candidate F0 by mean energy at its harmonics minus half the
    mean energy between them, on the pseudo-inverse linear spectrum; voicing
    is decided by the ratio of the winning comb to the band average.
    """
    cfg = cfg or AnalysisConfig(n_mels=mel.n_mels, sample_rate=mel.sample_rate,
                                hop=mel.frame_hop)
    pinv, candidates, comb_idx, gap_idx, usable, band = _comb_tables(
        cfg.n_mels, cfg.n_fft, cfg.sample_rate, cfg.mel_fmin, cfg.fmax, fmin, fmax)

    lin = np.maximum(np.exp(mel.values) @ pinv.T, 0.0)       # frames × freq bins
    counts = np.maximum(usable.sum(axis=1), 1)

    comb = np.where(usable[None], lin[:, comb_idx], 0.0).sum(axis=2) / counts[None]
    gaps = np.where(usable[None], lin[:, gap_idx], 0.0).sum(axis=2) / counts[None]
    score = comb - 0.5 * gaps                                  # frames × candidates

    background = lin[:, 1:band].mean(axis=1)
    best = np.argmax(score, axis=1)
    n_frames = mel.n_frames

    f0 = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    log_step = MEL_GRID_STEP_SEMITONES / 12.0 * np.log(2.0)
    for i in range(n_frames):
        j = int(best[i])
        peak_comb = comb[i, j]
        if background[i] <= 1e-10 or peak_comb < voicing_threshold * background[i]:
            continue
        if 0 < j < len(candidates) - 1:
            offset = float(_parabolic_refine(score[i, j - 1], score[i, j], score[i, j + 1]))
        else:
            offset = 0.0
        f0[i] = candidates[j] * np.exp(offset * log_step)
        voiced[i] = True
    return F0Contour(f0_hz=f0, voiced=voiced)
