"""Recover game state from the rendered mixture.

The mixing model is linear: mix = g_d * drums + g_s * strings + g_o *
others over any span where the gains are constant.  With the stems known,
the gains are identifiable by least squares (3x3 normal equations), and
inverting the level tables turns gains back into health/distance bins.
This is the objective test that the adaptive mixture actually carries
state information: if the bins come back, the information was there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio import AudioClip, RenderConfig, StemBank
from .mapping import GainSchedule, LevelTable, VolumeMap


class IllConditionedError(RuntimeError):
    """Stems too correlated over the window for gains to be identifiable."""


class BadWindowError(ValueError):
    """Requested window falls outside the available audio."""


@dataclass(frozen=True)
class DecoderConfig:
    window_samples: int = 4096
    ridge: float = 0.0
    condition_cap: float = 1e8

    def __post_init__(self):
        if self.window_samples < 3:
            raise ValueError("window_samples must be >= 3")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.condition_cap <= 0:
            raise ValueError("condition_cap must be positive")


@dataclass(frozen=True)
class DecodedState:
    """Gain estimates plus the level-table bins they map back to."""

    gains: tuple[float, float, float]   # (drums, strings, others), >= 0
    residual_rms: float
    hp1_bin: int
    hp2_bin: int
    pd_bin: int


def _stem_windows(stems: StemBank, phase: int, length: int) -> np.ndarray:
    """(length, 3) matrix of looped stem samples starting at `phase`."""
    loop = stems.loop_length
    idx = (phase + np.arange(length)) % loop
    return np.column_stack([clip.samples[idx] for clip in stems.clips()])


def estimate_gains(mix_window: np.ndarray, stems: StemBank, phase: int,
                   config: DecoderConfig = DecoderConfig()
                   ) -> tuple[tuple[float, float, float], float]:
    """Least-squares stem gains for one constant-gain window.

    Solves the 3x3 normal equations (optionally ridge-regularized),
    clamps negative solutions to zero, and reports the RMS residual of
    the reported gains.  Raises IllConditionedError when the stem Gram
    matrix condition number exceeds the configured cap.
    """
    mix = np.asarray(mix_window, dtype=np.float64)
    if mix.ndim != 1 or len(mix) < 3:
        raise BadWindowError("mix window must be 1-D with at least 3 samples")
    if phase < 0:
        raise BadWindowError("phase must be >= 0")
    basis = _stem_windows(stems, phase, len(mix))
    gram = basis.T @ basis + config.ridge * np.eye(3)
    eigvals = np.linalg.eigvalsh(gram)
    if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > config.condition_cap:
        raise IllConditionedError(
            "stem Gram matrix condition number exceeds "
            f"{config.condition_cap:g} over this window")
    gains = np.linalg.solve(gram, basis.T @ mix)
    gains = np.maximum(gains, 0.0)
    residual = mix - basis @ gains
    residual_rms = float(np.sqrt(np.mean(residual ** 2)))
    return (float(gains[0]), float(gains[1]), float(gains[2])), residual_rms


_TIE_EPS = 1e-9


def nearest_level(gain: float, table: LevelTable) -> int:
    """Index of the table volume closest to `gain`; ties break toward the
    louder volume.  Ties are judged with a small tolerance so midpoints
    like 0.575 between 0.55 and 0.60 resolve as intended despite binary
    float representation."""
    best = 0
    best_diff = abs(table.volumes[0] - gain)
    for i, volume in enumerate(table.volumes[1:], start=1):
        diff = abs(volume - gain)
        if diff < best_diff - _TIE_EPS:
            best, best_diff = i, diff
        elif abs(diff - best_diff) <= _TIE_EPS and volume > table.volumes[best]:
            best, best_diff = i, diff
    return best


def decode_window(mix_window: np.ndarray, stems: StemBank, phase: int,
                  vmap: VolumeMap,
                  config: DecoderConfig = DecoderConfig()) -> DecodedState:
    """Estimate gains for one window and invert them to state bins."""
    (g_drums, g_strings, g_others), residual_rms = estimate_gains(
        mix_window, stems, phase, config)
    return DecodedState(
        gains=(g_drums, g_strings, g_others),
        residual_rms=residual_rms,
        hp1_bin=nearest_level(g_strings, vmap.strings_table),
        hp2_bin=nearest_level(g_others, vmap.others_table),
        pd_bin=nearest_level(g_drums, vmap.drums_table),
    )


@dataclass(frozen=True)
class TickGeometry:
    """Timing of a rendered mixture: where ticks fall and when the gains
    changed.  Carries no gain values, so handing it to the decoder leaks
    only event timing, never the state being recovered."""

    tick_rate: int
    n_ticks: int
    change_ticks: tuple[int, ...]
    ramp_ms: float

    def __post_init__(self):
        if self.tick_rate <= 0 or self.n_ticks <= 0:
            raise ValueError("tick_rate and n_ticks must be positive")
        if any(not 0 < t < self.n_ticks for t in self.change_ticks):
            raise ValueError("change ticks must lie in (0, n_ticks)")
        if self.ramp_ms < 0:
            raise ValueError("ramp_ms must be >= 0")

    @classmethod
    def from_schedule(cls, schedule: GainSchedule,
                      render_config: RenderConfig = RenderConfig()
                      ) -> "TickGeometry":
        return cls(tick_rate=schedule.tick_rate, n_ticks=len(schedule),
                   change_ticks=tuple(schedule.change_ticks()),
                   ramp_ms=render_config.ramp_ms)


def decode_trace(mix: AudioClip, stems: StemBank, geometry: TickGeometry,
                 vmap: VolumeMap, config: DecoderConfig = DecoderConfig()
                 ) -> list[Optional[DecodedState]]:
    """Per-tick decode of a mixture rendered by this toolkit.

    Windows are centered inside tick intervals and sized at most one
    tick; every tick whose interval overlaps a gain ramp is skipped and
    reported as None.
    """
    sample_rate = mix.sample_rate
    n_ticks = geometry.n_ticks
    ramp_len = int(round(geometry.ramp_ms * sample_rate / 1000.0))
    boundaries = [(t * sample_rate) // geometry.tick_rate
                  for t in range(n_ticks + 1)]

    skip = [False] * n_ticks
    for change_tick in geometry.change_ticks:
        # An instantaneous step (ramp_len 0) lands exactly on the tick
        # boundary and contaminates nothing.
        ramp_end = boundaries[change_tick] + ramp_len
        for t in range(change_tick, n_ticks):
            if boundaries[t] >= ramp_end:
                break
            skip[t] = True

    out: list[Optional[DecodedState]] = []
    for t in range(n_ticks):
        t_start, t_end = boundaries[t], min(boundaries[t + 1], len(mix))
        window = min(config.window_samples, t_end - t_start)
        if skip[t] or window < 3:
            out.append(None)
            continue
        w0 = t_start + (t_end - t_start - window) // 2
        out.append(decode_window(mix.samples[w0:w0 + window], stems,
                                 phase=w0 % stems.loop_length, vmap=vmap,
                                 config=config))
    return out


DECODE_HEADER = ("tick,g_drums,g_strings,g_others,"
                 "hp1_bin,hp2_bin,pd_bin,residual_rms")


def decode_table_to_text(decoded: list[Optional[DecodedState]]) -> str:
    """Text table with one record per analyzed tick (skipped ticks are
    omitted)."""
    lines = [DECODE_HEADER]
    for tick, d in enumerate(decoded):
        if d is None:
            continue
        g_d, g_s, g_o = d.gains
        lines.append(f"{tick},{g_d!r},{g_s!r},{g_o!r},"
                     f"{d.hp1_bin},{d.hp2_bin},{d.pd_bin},{d.residual_rms!r}")
    return "\n".join(lines) + "\n"
