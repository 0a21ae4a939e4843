"""Threshold tables that turn game state into per-stem volumes.

Three instrument stems track three game quantities: the strings follow
player 1's health, the "others" stem follows player 2's health, and the
drums follow the horizontal distance between the players.  Each quantity
is quantized through a level table - a descending list of thresholds,
one volume per threshold - so the mix moves in audible, discrete steps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .sim import GameState, player_distance

# Built-in tables.  Health runs 400 down to 50 and gets quieter as the
# fighter weakens; distance runs 800 down to 0 and the drums get louder
# as the fighters close in.
HP_LEVELS = (400, 300, 250, 200, 150, 100, 50)
HP_VOLUMES_PERCENT = (75, 60, 55, 40, 35, 25, 10)
PD_LEVELS = (800, 600, 500, 400, 300, 60, 0)
PD_VOLUMES_PERCENT = (10, 20, 30, 40, 50, 60, 75)


@dataclass(frozen=True)
class LevelTable:
    """Descending thresholds paired with linear amplitude gains in [0, 1]."""

    thresholds: tuple[int, ...]
    volumes: tuple[float, ...]

    def __post_init__(self):
        if not self.thresholds:
            raise ValueError("level table needs at least one threshold")
        if len(self.thresholds) != len(self.volumes):
            raise ValueError("thresholds and volumes must have equal length")
        if any(b >= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly decreasing")
        if any(not 0.0 <= v <= 1.0 for v in self.volumes):
            raise ValueError("volumes must lie in [0, 1]")

    @property
    def lowest_bin(self) -> int:
        """Index of the bottom threshold (the last bin)."""
        return len(self.thresholds) - 1


def hp_table() -> LevelTable:
    return LevelTable(HP_LEVELS, tuple(v / 100 for v in HP_VOLUMES_PERCENT))


def pd_table() -> LevelTable:
    return LevelTable(PD_LEVELS, tuple(v / 100 for v in PD_VOLUMES_PERCENT))


@dataclass(frozen=True)
class VolumeMap:
    """Wiring of the three stems to the three tracked quantities.

    strings_table is keyed by player 1 HP, others_table by player 2 HP,
    drums_table by player distance.
    """

    strings_table: LevelTable
    others_table: LevelTable
    drums_table: LevelTable


def default_volume_map() -> VolumeMap:
    return VolumeMap(strings_table=hp_table(), others_table=hp_table(),
                     drums_table=pd_table())


@dataclass(frozen=True)
class MixDirective:
    """Stem gains in force at one tick."""

    tick: int
    gain_strings: float
    gain_others: float
    gain_drums: float

    def gains_dso(self) -> tuple[float, float, float]:
        """Gains in (drums, strings, others) order, matching stem order."""
        return (self.gain_drums, self.gain_strings, self.gain_others)


@dataclass(frozen=True)
class GainSchedule:
    """Per-tick mix directives, ticks contiguous from 0."""

    tick_rate: int
    directives: tuple[MixDirective, ...]

    def __post_init__(self):
        if self.tick_rate <= 0:
            raise ValueError("tick_rate must be positive")
        if not self.directives:
            raise ValueError("schedule must contain at least one directive")
        for i, d in enumerate(self.directives):
            if d.tick != i:
                raise ValueError("directive ticks must be contiguous from 0")

    def __len__(self) -> int:
        return len(self.directives)

    def change_ticks(self) -> list[int]:
        """Ticks at which the gain triple differs from the previous tick."""
        out = []
        prev = self.directives[0]
        for d in self.directives[1:]:
            if d.gains_dso() != prev.gains_dso():
                out.append(d.tick)
            prev = d
        return out


def level_lookup(table: LevelTable, value: int) -> float:
    """Gain for a raw quantity value.

    The value is clamped into [min(0, bottom threshold), top threshold],
    then the volume of the smallest threshold >= the clamped value is
    returned.  Total over all integers: values above the top threshold
    clamp down, values below the bottom threshold clamp up.
    """
    lo = min(0, table.thresholds[-1])
    v = max(lo, min(int(value), table.thresholds[0]))
    for threshold, volume in zip(reversed(table.thresholds), reversed(table.volumes)):
        if threshold >= v:
            return volume
    # Unreachable: after clamping, the top threshold always qualifies.
    raise AssertionError("clamped value above top threshold")


def level_bin(table: LevelTable, value: int) -> int:
    """Index of the bin `value` falls into (same rule as level_lookup)."""
    lo = min(0, table.thresholds[-1])
    v = max(lo, min(int(value), table.thresholds[0]))
    for i in range(len(table.thresholds) - 1, -1, -1):
        if table.thresholds[i] >= v:
            return i
    raise AssertionError("clamped value above top threshold")


def directive_for(state: GameState, vmap: VolumeMap) -> MixDirective:
    """Mix directive for one game state: strings follow p1 HP, others p2 HP,
    drums the player distance."""
    return MixDirective(
        tick=state.tick,
        gain_strings=level_lookup(vmap.strings_table, state.p1.hp),
        gain_others=level_lookup(vmap.others_table, state.p2.hp),
        gain_drums=level_lookup(vmap.drums_table, player_distance(state)),
    )


def schedule_from_trace(trace: Sequence[GameState], vmap: VolumeMap,
                        tick_rate: int = 60) -> GainSchedule:
    """Lift a state trace to a per-tick gain timeline.

    One directive per trace entry; consecutive duplicates are preserved
    (run compression is the renderer's concern).  Trace ticks must be
    strictly increasing; schedule ticks are re-indexed from 0.
    """
    if not trace:
        raise ValueError("empty trace")
    for a, b in zip(trace, trace[1:]):
        if b.tick <= a.tick:
            raise ValueError("trace ticks must be strictly increasing")
    directives = []
    for i, state in enumerate(trace):
        d = directive_for(state, vmap)
        directives.append(MixDirective(tick=i, gain_strings=d.gain_strings,
                                       gain_others=d.gain_others,
                                       gain_drums=d.gain_drums))
    return GainSchedule(tick_rate=tick_rate, directives=tuple(directives))


def _table_from_config(obj: dict, name: str) -> LevelTable:
    try:
        thresholds = obj["thresholds"]
        volumes_percent = obj["volumes_percent"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"table {name!r} must define 'thresholds' and "
                         f"'volumes_percent'") from exc
    if not all(isinstance(t, int) for t in thresholds):
        raise ValueError(f"table {name!r}: thresholds must be integers")
    if not all(isinstance(v, int) for v in volumes_percent):
        raise ValueError(f"table {name!r}: volumes_percent must be integers")
    return LevelTable(tuple(thresholds), tuple(v / 100 for v in volumes_percent))


def load_volume_map(path) -> VolumeMap:
    """Load a volume map from a JSON document.

    Expected shape: {"strings": {"thresholds": [...], "volumes_percent":
    [...]}, "others": {...}, "drums": {...}}.  Validation mirrors the
    LevelTable invariants; volumes are integer percents.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return VolumeMap(
        strings_table=_table_from_config(doc["strings"], "strings"),
        others_table=_table_from_config(doc["others"], "others"),
        drums_table=_table_from_config(doc["drums"], "drums"),
    )


def volume_map_to_config(vmap: VolumeMap) -> dict:
    """Inverse of load_volume_map, for writing default tables out."""
    def table(t: LevelTable) -> dict:
        return {"thresholds": list(t.thresholds),
                "volumes_percent": [round(v * 100) for v in t.volumes]}
    return {"strings": table(vmap.strings_table),
            "others": table(vmap.others_table),
            "drums": table(vmap.drums_table)}
