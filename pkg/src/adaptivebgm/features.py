"""Audio observation front-ends: raw frames, FFT magnitude, mel spectrogram.

These are the deterministic feature extractors an audio-only agent would
consume.  The Fourier transform is a self-contained radix-2 implementation
(power-of-two frames only) so it can be checked bin-for-bin against a
naive DFT.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio import AudioClip

RAW = "raw"
FFT_MAG = "fft_mag"
MEL_SPEC = "mel_spec"
KINDS = (RAW, FFT_MAG, MEL_SPEC)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FeatureConfig:
    frame_size: int = 1024
    hop: int = 512
    window: str = "hann"          # "hann" or "rect"
    n_mels: int = 80
    f_min: float = 0.0
    f_max: float | None = None    # None -> sample_rate / 2
    log_floor: float = 1e-10

    def __post_init__(self):
        if not _is_pow2(self.frame_size):
            raise ValueError("frame_size must be a power of two")
        if not 0 < self.hop <= self.frame_size:
            raise ValueError("hop must be in (0, frame_size]")
        if self.window not in ("hann", "rect"):
            raise ValueError(f"unknown window {self.window!r}")
        if self.n_mels < 1:
            raise ValueError("n_mels must be >= 1")
        if self.f_min < 0:
            raise ValueError("f_min must be >= 0")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    def resolved_f_max(self, sample_rate: int) -> float:
        f_max = sample_rate / 2 if self.f_max is None else self.f_max
        if not self.f_min < f_max <= sample_rate / 2:
            raise ValueError("need f_min < f_max <= sample_rate/2")
        return f_max


@dataclass(frozen=True)
class FeatureVector:
    kind: str
    data: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError("feature data must be 2-D")
        if not np.all(np.isfinite(data)):
            raise ValueError("feature data must be finite")
        object.__setattr__(self, "data", data)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def _window(config: FeatureConfig) -> np.ndarray:
    n = config.frame_size
    if config.window == "hann":
        return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)
    return np.ones(n)


def frame_raw(clip: AudioClip, start: int, config: FeatureConfig) -> FeatureVector:
    """One frame of raw samples starting at `start`, zero-padded past the
    end of the clip."""
    if start < 0:
        raise ValueError("start must be >= 0")
    n = config.frame_size
    out = np.zeros(n, dtype=np.float64)
    src = clip.samples[start:start + n]
    out[:len(src)] = src
    return FeatureVector(kind=RAW, data=out.reshape(1, n))


def _bit_reversed(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft_pow2(x: np.ndarray) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT for power-of-two lengths."""
    n = len(x)
    if not _is_pow2(n):
        raise ValueError("fft_pow2 requires a power-of-two length")
    data = np.asarray(x, dtype=np.complex128)[_bit_reversed(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = data.reshape(-1, size)
        even = blocks[:, :half]
        odd = blocks[:, half:] * twiddle
        data = np.hstack((even + odd, even - odd)).ravel()
        size *= 2
    return data


def fft_magnitude(frame: FeatureVector, config: FeatureConfig) -> FeatureVector:
    """Windowed magnitude spectrum of one raw frame: bins 0..frame_size/2."""
    if frame.kind != RAW:
        raise ValueError("fft_magnitude expects a raw frame")
    samples = frame.data.ravel()
    if len(samples) != config.frame_size:
        raise ValueError("frame length must equal config.frame_size")
    spectrum = fft_pow2(samples * _window(config))
    mags = np.abs(spectrum[:config.frame_size // 2 + 1])
    return FeatureVector(kind=FFT_MAG, data=mags.reshape(1, -1))


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def _filterbank_cached(frame_size: int, n_mels: int, f_min: float, f_max: float,
                       sample_rate: int) -> np.ndarray:
    # Centers equally spaced on the mel scale; triangles evaluated at the
    # FFT bin frequencies.
    mel_points = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(frame_size // 2 + 1) * sample_rate / frame_size
    bank = np.zeros((n_mels, len(bin_freqs)))
    for m in range(n_mels):
        left, center, right = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (bin_freqs - left) / (center - left)
        falling = (right - bin_freqs) / (right - center)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
    if np.any(bank.sum(axis=1) == 0.0):
        raise ValueError("n_mels too large for the frequency resolution: "
                         "some filters have zero support")
    return bank


def mel_filterbank(config: FeatureConfig, sample_rate: int) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, frame_size/2 + 1)."""
    f_max = config.resolved_f_max(sample_rate)
    return _filterbank_cached(config.frame_size, config.n_mels, config.f_min,
                              f_max, sample_rate).copy()


def mel_spectrogram(clip: AudioClip, config: FeatureConfig) -> FeatureVector:
    """Log mel power spectrogram, shape (n_mels, n_frames).

    Frames the clip with frame_size/hop, takes windowed power spectra,
    applies the filterbank, then log(power + log_floor).
    """
    n, hop = config.frame_size, config.hop
    if len(clip) < n:
        raise ValueError("clip shorter than one frame")
    n_frames = (len(clip) - n) // hop + 1
    window = _window(config)
    bank = mel_filterbank(config, clip.sample_rate)
    out = np.empty((config.n_mels, n_frames))
    for j in range(n_frames):
        frame = clip.samples[j * hop:j * hop + n] * window
        power = np.abs(fft_pow2(frame)[:n // 2 + 1]) ** 2
        out[:, j] = np.log(bank @ power + config.log_floor)
    return FeatureVector(kind=MEL_SPEC, data=out)


def extract(clip: AudioClip, kind: str, config: FeatureConfig,
            start: int = 0) -> FeatureVector:
    """Uniform entry point over the three feature kinds."""
    if kind == RAW:
        return frame_raw(clip, start, config)
    if kind == FFT_MAG:
        return fft_magnitude(frame_raw(clip, start, config), config)
    if kind == MEL_SPEC:
        return mel_spectrogram(clip, config)
    raise ValueError(f"unknown feature kind {kind!r}")


def feature_to_text(fv: FeatureVector) -> str:
    """Text form: `kind rows cols` then row-major values, one row per
    line, shortest round-trippable decimals."""
    rows, cols = fv.shape
    lines = [f"{fv.kind} {rows} {cols}"]
    for row in fv.data:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
