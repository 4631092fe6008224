"""Core value types of the signal layer.

Everything here is a plain dataclass over numpy arrays. Invariants are
checked on construction via ``validate()`` so downstream code can assume
well-formed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from pitchcodec.errors import ConfigurationError, DataError


@dataclass
class AnalysisConfig:
    """Front-end framing shared by mel analysis, pitch tracking, and synthesis."""

    sample_rate: int = 16000
    n_fft: int = 1024          # also the analysis window length
    hop: int = 256
    n_mels: int = 80
    mel_fmin: float = 0.0
    mel_fmax: float | None = None   # defaults to Nyquist
    log_floor: float = 1e-5

    @property
    def fmax(self) -> float:
        return self.sample_rate / 2 if self.mel_fmax is None else self.mel_fmax

    def n_frames(self, n_samples: int) -> int:
        return n_samples // self.hop

    def validate(self) -> None:
        if self.hop <= 0 or self.n_fft <= 0 or self.n_mels <= 0:
            raise ConfigurationError("hop, n_fft and n_mels must be positive")
        if self.n_fft < self.hop:
            raise ConfigurationError("analysis window must be at least one hop long")
        if self.fmax > self.sample_rate / 2:
            raise ConfigurationError("mel_fmax exceeds Nyquist")


@dataclass
class AudioClip:
    """Mono waveform with samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def validate(self) -> None:
        if self.samples.ndim != 1 or len(self.samples) == 0:
            raise DataError("clip must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.samples)):
            raise DataError("clip contains non-finite samples")
        if np.max(np.abs(self.samples)) > 1.0 + 1e-9:
            raise DataError("clip samples exceed [-1, 1]")


@dataclass
class F0Contour:
    """Per-frame fundamental frequency with voiced / missing flags.

    ``f0_hz`` is 0 on unvoiced frames. ``missing`` marks frames where F0 is
    unavailable (e.g. simulated tracker dropout); it is orthogonal to
    ``voiced`` and does not imply it.
    """

    f0_hz: np.ndarray
    voiced: np.ndarray
    missing: np.ndarray | None = None

    def __post_init__(self):
        self.f0_hz = np.asarray(self.f0_hz, dtype=np.float64)
        self.voiced = np.asarray(self.voiced, dtype=bool)
        if self.missing is None:
            self.missing = np.zeros_like(self.voiced)
        else:
            self.missing = np.asarray(self.missing, dtype=bool)

    def __len__(self) -> int:
        return len(self.f0_hz)

    @property
    def n_frames(self) -> int:
        return len(self.f0_hz)

    def copy(self) -> "F0Contour":
        return F0Contour(self.f0_hz.copy(), self.voiced.copy(), self.missing.copy())

    def validate(self) -> None:
        if not (len(self.f0_hz) == len(self.voiced) == len(self.missing)):
            raise DataError("contour arrays must have equal length")
        if not np.all(np.isfinite(self.f0_hz)):
            raise DataError("contour contains non-finite F0 values")
        if np.any(self.f0_hz[self.voiced] <= 0):
            raise DataError("voiced frames must carry positive F0")
        if np.any(self.f0_hz[~self.voiced] != 0):
            raise DataError("unvoiced frames must store F0 = 0")

    @staticmethod
    def constant(f0: float, n_frames: int) -> "F0Contour":
        return F0Contour(np.full(n_frames, float(f0)), np.ones(n_frames, bool))


@dataclass
class MelSpectrogram:
    """Log-magnitude mel matrix, time-major: values[frame, mel_bin]."""

    values: np.ndarray
    frame_hop: int
    sample_rate: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_mels(self) -> int:
        return self.values.shape[1]

    def validate(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise DataError("mel matrix must be 2-D with at least one frame")
        if not np.all(np.isfinite(self.values)):
            raise DataError("mel matrix contains non-finite entries")


FormantSet = Sequence[tuple[float, float]]   # [(center_hz, bandwidth_hz), ...]


@dataclass
class UtteranceSpec:
    """Generative recipe for one synthetic utterance.

    ``formant_track`` holds one formant set per contiguous segment;
    ``segment_labels`` assigns a small-integer phone id to every frame, and
    its runs of equal value line up one-to-one with ``formant_track``.
    The ``seed`` pins the noise source so re-rendering (with any contour)
    is fully deterministic.
    """

    f0_track: F0Contour
    formant_track: list[FormantSet]
    segment_labels: np.ndarray
    speaker_id: int
    duration_s: float
    seed: int = 0

    def __post_init__(self):
        self.segment_labels = np.asarray(self.segment_labels, dtype=np.int64)

    @property
    def n_frames(self) -> int:
        return len(self.f0_track)

    def segment_runs(self) -> list[tuple[int, int]]:
        """Contiguous [start, end) frame ranges of equal segment label."""
        labels = self.segment_labels
        if len(labels) == 0:
            return []
        bounds = np.flatnonzero(np.diff(labels)) + 1
        starts = np.concatenate(([0], bounds))
        ends = np.concatenate((bounds, [len(labels)]))
        return list(zip(starts.tolist(), ends.tolist()))

    def validate(self, *, sample_rate: int | None = None) -> None:
        self.f0_track.validate()
        if self.n_frames < 1:
            raise ConfigurationError("utterance must span at least one frame")
        if len(self.segment_labels) != self.n_frames:
            raise DataError("segment labels must match the contour length")
        runs = self.segment_runs()
        if len(runs) != len(self.formant_track):
            raise DataError(
                f"formant track has {len(self.formant_track)} segments, "
                f"labels imply {len(runs)}"
            )
        for formants in self.formant_track:
            if len(formants) < 2:
                raise ConfigurationError("each segment needs at least two formants")
            if sample_rate is not None:
                nyquist = sample_rate / 2
                for center, _bw in formants:
                    if center >= nyquist:
                        raise ConfigurationError(
                            f"formant at {center} Hz is at or above Nyquist ({nyquist} Hz)"
                        )

    def with_f0(self, new_f0: F0Contour) -> "UtteranceSpec":
        if len(new_f0) != self.n_frames:
            raise DataError(
                f"replacement contour has {len(new_f0)} frames, spec has {self.n_frames}"
            )
        return replace(self, f0_track=new_f0.copy())
