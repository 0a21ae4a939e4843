"""Deterministic 1-D duel simulator.

Two fighters on a horizontal stage trade range-gated attacks.  The
simulator exists to produce health and distance trajectories for the
adaptive music layer, so the mechanics are intentionally minimal: move
left/right, attack, guard, idle, one action per fighter per tick.
Everything is a pure function of (config, actions); there is no hidden
randomness.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

MAX_HP = 400          # health at round start
PD_CLAMP = 800        # reported player distance saturates here (pixels)


class Action(enum.Enum):
    MOVE_LEFT = "move_left"
    MOVE_RIGHT = "move_right"
    ATTACK = "attack"
    GUARD = "guard"
    IDLE = "idle"


class Winner(enum.Enum):
    P1 = "P1"
    P2 = "P2"
    DRAW = "Draw"
    ONGOING = "Ongoing"


@dataclass(frozen=True)
class FighterState:
    hp: int
    x: int
    guard: bool = False

    def __post_init__(self):
        if not 0 <= self.hp <= MAX_HP:
            raise ValueError(f"hp out of range: {self.hp}")
        if self.x < 0:
            raise ValueError(f"position out of range: {self.x}")


@dataclass(frozen=True)
class GameState:
    tick: int
    p1: FighterState
    p2: FighterState
    limit_ticks: int

    def __post_init__(self):
        if self.tick < 0 or self.tick > self.limit_ticks:
            raise ValueError(f"tick {self.tick} outside [0, {self.limit_ticks}]")


@dataclass(frozen=True)
class RoundResult:
    """Outcome of one round, from player 1's perspective."""

    winner: Winner
    hp_self: int
    hp_opp: int
    ticks_elapsed: int


@dataclass(frozen=True)
class SimConfig:
    stage_width: int = 800
    tick_rate: int = 60
    round_seconds: int = 60
    attack_range: int = 120
    attack_damage: int = 10
    move_speed: int = 8
    start_separation: int = 640
    seed: int = 0

    def __post_init__(self):
        positive = ("stage_width", "tick_rate", "round_seconds", "attack_range",
                    "attack_damage", "move_speed", "start_separation")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.start_separation > self.stage_width:
            raise ValueError("start_separation cannot exceed stage_width")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def limit_ticks(self) -> int:
        return self.round_seconds * self.tick_rate


# A policy maps the full game state to one action.  Stateful policies
# (cooldowns, trend tracking) are callables holding their own state.
Policy = Callable[[GameState], Action]


class RoundOverError(RuntimeError):
    """Raised when stepping a round that already has a winner."""


def new_round(config: SimConfig) -> GameState:
    """Fresh round: full health, fighters placed symmetrically around the
    stage center at config.start_separation."""
    x1 = (config.stage_width - config.start_separation) // 2
    x2 = x1 + config.start_separation
    return GameState(
        tick=0,
        p1=FighterState(hp=MAX_HP, x=x1),
        p2=FighterState(hp=MAX_HP, x=x2),
        limit_ticks=config.limit_ticks,
    )


def player_distance(state: GameState) -> int:
    """Horizontal distance between the fighters, clamped to PD_CLAMP."""
    return min(abs(state.p1.x - state.p2.x), PD_CLAMP)


def decide_winner(state: GameState) -> Winner:
    """Round outcome for a state.

    A fighter whose opponent hit zero HP wins immediately.  Both at zero
    is a draw.  At the tick limit the higher HP wins, equal HP draws.
    """
    p1_dead, p2_dead = state.p1.hp == 0, state.p2.hp == 0
    if p1_dead and p2_dead:
        return Winner.DRAW
    if p1_dead:
        return Winner.P2
    if p2_dead:
        return Winner.P1
    if state.tick >= state.limit_ticks:
        if state.p1.hp > state.p2.hp:
            return Winner.P1
        if state.p2.hp > state.p1.hp:
            return Winner.P2
        return Winner.DRAW
    return Winner.ONGOING


def _moved(x: int, action: Action, config: SimConfig) -> int:
    if action is Action.MOVE_LEFT:
        x -= config.move_speed
    elif action is Action.MOVE_RIGHT:
        x += config.move_speed
    return max(0, min(x, config.stage_width))


def step(state: GameState, a1: Action, a2: Action, config: SimConfig) -> GameState:
    """Advance one tick with simultaneous resolution.

    Movement applies first (both fighters, independently, clamped to the
    stage), then attacks are checked against the post-move distance: an
    attack lands iff the raw distance is within attack_range and the
    opponent did not guard this tick.  Both attacks may land on the same
    tick.  HP never increases and floors at zero.
    """
    if decide_winner(state) is not Winner.ONGOING:
        raise RoundOverError("round already decided")

    x1 = _moved(state.p1.x, a1, config)
    x2 = _moved(state.p2.x, a2, config)
    distance = abs(x1 - x2)

    hp1, hp2 = state.p1.hp, state.p2.hp
    if a1 is Action.ATTACK and distance <= config.attack_range and a2 is not Action.GUARD:
        hp2 = max(0, hp2 - config.attack_damage)
    if a2 is Action.ATTACK and distance <= config.attack_range and a1 is not Action.GUARD:
        hp1 = max(0, hp1 - config.attack_damage)

    return GameState(
        tick=state.tick + 1,
        p1=FighterState(hp=hp1, x=x1, guard=a1 is Action.GUARD),
        p2=FighterState(hp=hp2, x=x2, guard=a2 is Action.GUARD),
        limit_ticks=state.limit_ticks,
    )


def run_round(policy1: Policy, policy2: Policy, config: SimConfig,
              state_sink: Optional[Callable[[GameState], None]] = None) -> RoundResult:
    """Run a round to completion and return the result from p1's side.

    The sink receives every pre-step state (ticks 0 .. end-1); the final
    decided state is summarized in the RoundResult.  Terminates within
    limit_ticks + 1 evaluations by construction.
    """
    state = new_round(config)
    while decide_winner(state) is Winner.ONGOING:
        if state_sink is not None:
            state_sink(state)
        state = step(state, policy1(state), policy2(state), config)
    return RoundResult(
        winner=decide_winner(state),
        hp_self=state.p1.hp,
        hp_opp=state.p2.hp,
        ticks_elapsed=state.tick,
    )


# Trace text format: header then one integer record per tick.
TRACE_HEADER = "tick,p1_hp,p2_hp,p1_x,p2_x"


def trace_to_text(trace: list[GameState]) -> str:
    lines = [TRACE_HEADER]
    lines.extend(f"{s.tick},{s.p1.hp},{s.p2.hp},{s.p1.x},{s.p2.x}" for s in trace)
    return "\n".join(lines) + "\n"


def trace_from_text(text: str) -> list[GameState]:
    """Parse the trace format back into states (guard flags are not part
    of the format and come back False)."""
    lines = text.splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ValueError(f"bad trace header, expected {TRACE_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise ValueError(f"trace line {lineno}: expected 5 fields")
        try:
            tick, hp1, hp2, x1, x2 = (int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"trace line {lineno}: non-integer field") from exc
        rows.append((tick, hp1, hp2, x1, x2))
    if not rows:
        raise ValueError("trace has no records")
    limit = rows[-1][0] + 1
    states = []
    for tick, hp1, hp2, x1, x2 in rows:
        states.append(GameState(tick=tick, p1=FighterState(hp=hp1, x=x1),
                                p2=FighterState(hp=hp2, x=x2), limit_ticks=limit))
    return states
