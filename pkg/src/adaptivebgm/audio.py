"""Stem storage, WAV I/O and rendering of the adaptive mixture.

Audio is mono float64 internally, nominally in [-1, 1].  Rendering
multiplies each looped stem by its per-sample gain curve and sums; gain
changes are smoothed with short linear ramps so volume steps never click.
"""

from __future__ import annotations

import wave
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .mapping import GainSchedule

STEM_NAMES = ("drums", "strings", "others")
_PCM16_SCALE = 32768.0


@dataclass(frozen=True)
class AudioClip:
    """Mono audio: a sample rate and a 1-D float array of finite samples."""

    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)

    @property
    def channels(self) -> int:
        return 1

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class StemBank:
    """The three loop-aligned instrument stems of one piece of music."""

    drums: AudioClip
    strings: AudioClip
    others: AudioClip

    def __post_init__(self):
        rates = {c.sample_rate for c in self.clips()}
        if len(rates) != 1:
            raise ValueError(f"stems disagree on sample rate: {sorted(rates)}")
        lengths = {len(c) for c in self.clips()}
        if len(lengths) != 1:
            raise ValueError(f"stems disagree on length: {sorted(lengths)}")

    def clips(self) -> tuple[AudioClip, AudioClip, AudioClip]:
        """Clips in canonical (drums, strings, others) order."""
        return (self.drums, self.strings, self.others)

    @property
    def sample_rate(self) -> int:
        return self.drums.sample_rate

    @property
    def loop_length(self) -> int:
        return len(self.drums)


@dataclass(frozen=True)
class RenderConfig:
    ramp_ms: float = 50.0
    clip_policy: str = "hard_clamp"
    loop: bool = True

    def __post_init__(self):
        if self.ramp_ms < 0:
            raise ValueError("ramp_ms must be >= 0")
        if self.clip_policy != "hard_clamp":
            raise ValueError(f"unknown clip policy {self.clip_policy!r}")


def load_wav(path) -> AudioClip:
    """Read a 16-bit PCM RIFF/WAVE file.

    Stereo is downmixed by averaging; samples are scaled by 1/32768.
    Anything other than 16-bit integer PCM is rejected.
    """
    try:
        with wave.open(str(path), "rb") as wav:
            n_channels = wav.getnchannels()
            width = wav.getsampwidth()
            rate = wav.getframerate()
            n_frames = wav.getnframes()
            raw = wav.readframes(n_frames)
    except FileNotFoundError:
        raise
    except (wave.Error, EOFError) as exc:
        raise ValueError(f"{path}: not a readable PCM WAV file: {exc}") from exc
    if width != 2:
        raise ValueError(f"{path}: unsupported sample width {width * 8} bits "
                         f"(only 16-bit PCM)")
    if n_channels not in (1, 2):
        raise ValueError(f"{path}: unsupported channel count {n_channels}")
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / _PCM16_SCALE
    if n_channels == 2:
        data = data.reshape(-1, 2).mean(axis=1)
    return AudioClip(sample_rate=rate, samples=data)


def save_wav(clip: AudioClip, path) -> None:
    """Write mono 16-bit PCM.  Samples outside [-1, 1] are hard-clamped,
    then quantized by round-to-nearest."""
    clamped = np.clip(clip.samples, -1.0, 1.0)
    codes = np.rint(clamped * _PCM16_SCALE)
    codes = np.clip(codes, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(codes.tobytes())


@dataclass
class _Ramp:
    """One resolved gain transition: linear from start_value to target
    over `length` samples beginning at `start_sample`."""

    start_sample: int
    start_value: float
    target: float
    length: int

    def value_at(self, sample: int) -> float:
        if self.length == 0 or sample >= self.start_sample + self.length:
            return self.target
        frac = (sample - self.start_sample) / self.length
        return self.start_value + (self.target - self.start_value) * frac


class GainAutomation:
    """Per-sample gain curve for one stem, derived from per-tick values.

    Tick k begins at sample floor(k * sample_rate / tick_rate).  When the
    tick value changes, the gain ramps linearly to the new value over the
    ramp duration, starting from wherever the previous ramp left it, so
    the curve is continuous even when changes arrive faster than a ramp
    can finish.  Outside the scheduled span the boundary values hold.
    """

    def __init__(self, tick_values, tick_rate: int, sample_rate: int,
                 ramp_ms: float):
        values = [float(v) for v in tick_values]
        if not values:
            raise ValueError("empty tick values")
        ramp_len = int(round(ramp_ms * sample_rate / 1000.0))
        ramps = [_Ramp(0, values[0], values[0], 0)]
        target = values[0]
        for k, v in enumerate(values):
            if v != target:
                start = (k * sample_rate) // tick_rate
                ramps.append(_Ramp(start, ramps[-1].value_at(start), v, ramp_len))
                target = v
        self._ramps = ramps
        self._starts = [r.start_sample for r in ramps]
        self.end_sample = (len(values) * sample_rate) // tick_rate

    def value_at(self, sample: int) -> float:
        sample = max(0, min(sample, self.end_sample))
        i = bisect_right(self._starts, sample) - 1
        return self._ramps[i].value_at(sample)

    def curve(self, n_samples: int) -> np.ndarray:
        """Vectorized gain curve over samples [0, n_samples)."""
        out = np.empty(n_samples, dtype=np.float64)
        for i, ramp in enumerate(self._ramps):
            seg_start = ramp.start_sample
            seg_end = (self._ramps[i + 1].start_sample
                       if i + 1 < len(self._ramps) else n_samples)
            seg_end = min(seg_end, n_samples)
            if seg_start >= seg_end:
                continue
            idx = np.arange(seg_start, seg_end)
            if ramp.length == 0:
                out[seg_start:seg_end] = ramp.target
            else:
                frac = np.minimum((idx - ramp.start_sample) / ramp.length, 1.0)
                out[seg_start:seg_end] = (ramp.start_value
                                          + (ramp.target - ramp.start_value) * frac)
        return out


class RampTracker:
    """Incremental counterpart of GainAutomation for closed-loop renders
    where tick values arrive one at a time."""

    def __init__(self, initial: float, sample_rate: int, ramp_ms: float):
        self._ramp = _Ramp(0, float(initial), float(initial), 0)
        self._ramp_len = int(round(ramp_ms * sample_rate / 1000.0))

    def set_target(self, sample: int, value: float) -> None:
        value = float(value)
        if value != self._ramp.target:
            self._ramp = _Ramp(sample, self._ramp.value_at(sample), value,
                               self._ramp_len)

    def curve(self, start: int, end: int) -> np.ndarray:
        ramp = self._ramp
        if ramp.length == 0:
            return np.full(end - start, ramp.target)
        idx = np.arange(start, end, dtype=np.float64)
        frac = np.clip((idx - ramp.start_sample) / ramp.length, 0.0, 1.0)
        return ramp.start_value + (ramp.target - ramp.start_value) * frac


def _automations(schedule: GainSchedule, sample_rate: int,
                 config: RenderConfig) -> tuple[GainAutomation, ...]:
    columns = zip(*(d.gains_dso() for d in schedule.directives))
    return tuple(GainAutomation(col, schedule.tick_rate, sample_rate,
                                config.ramp_ms) for col in columns)


def gain_at(schedule: GainSchedule, sample_index: int, sample_rate: int,
            config: RenderConfig) -> tuple[float, float, float]:
    """Instantaneous (drums, strings, others) gains at one sample."""
    autos = _automations(schedule, sample_rate, config)
    return tuple(a.value_at(sample_index) for a in autos)


@dataclass(frozen=True)
class RenderResult:
    clip: AudioClip
    clipped_samples: int


def render_mix(stems: StemBank, schedule: GainSchedule,
               config: RenderConfig = RenderConfig()) -> RenderResult:
    """Render the gain-scheduled sum of the three stems.

    Output length is the schedule duration in samples (ticks *
    sample_rate / tick_rate, floored).  Stems loop (or zero-pad when
    looping is off), the sum is hard-clamped to [-1, 1], and the number
    of clamped samples is reported.
    """
    sample_rate = stems.sample_rate
    n = (len(schedule) * sample_rate) // schedule.tick_rate
    if n == 0:
        raise ValueError("schedule too short to produce any samples")
    loop = stems.loop_length
    idx = np.arange(n)
    if config.loop:
        positions = idx % loop
    else:
        positions = np.minimum(idx, loop - 1)
        pad_mask = idx >= loop
    out = np.zeros(n, dtype=np.float64)
    for auto, clip in zip(_automations(schedule, sample_rate, config), stems.clips()):
        source = clip.samples[positions]
        if not config.loop:
            source = np.where(pad_mask, 0.0, source)
        out += auto.curve(n) * source
    clipped = int(np.count_nonzero(np.abs(out) > 1.0))
    np.clip(out, -1.0, 1.0, out=out)
    return RenderResult(clip=AudioClip(sample_rate=sample_rate, samples=out),
                        clipped_samples=clipped)
