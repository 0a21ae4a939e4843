"""Scripted fighter policies.

These see the full game state (they are the simulator-side opponents and
baselines); the audio-only agent lives in the evaluate module and never
touches the state directly.
"""

from __future__ import annotations

from .sim import Action, GameState, SimConfig, player_distance


def idle_policy(state: GameState) -> Action:
    return Action.IDLE


class AggressorPolicy:
    """Relentless attacker: walk at the opponent, swing when in range.

    An optional cooldown inserts idle ticks between swings (recovery
    frames).  cooldown=1 attacks every tick.
    """

    def __init__(self, player: int, config: SimConfig, cooldown: int = 1):
        if player not in (1, 2):
            raise ValueError("player must be 1 or 2")
        if cooldown < 1:
            raise ValueError("cooldown must be >= 1")
        self.player = player
        self.config = config
        self.cooldown = cooldown
        self._timer = 0

    def __call__(self, state: GameState) -> Action:
        me, opp = ((state.p1, state.p2) if self.player == 1
                   else (state.p2, state.p1))
        if self._timer > 0:
            self._timer -= 1
            return Action.IDLE
        if abs(me.x - opp.x) <= self.config.attack_range:
            self._timer = self.cooldown - 1
            return Action.ATTACK
        return Action.MOVE_RIGHT if opp.x > me.x else Action.MOVE_LEFT


class SpacingOpponent:
    """Cautious counter-puncher: holds a preferred standoff distance and
    punishes anyone who steps inside attack range.

    Approaches when the gap exceeds `station`, backs off when crowded
    below `station - margin`, and attacks (with `cooldown` ticks of
    recovery between swings) whenever the opponent is within `trigger`.
    Against a passive opponent it parks at its station; pressed into a
    wall it stands and fights.
    """

    def __init__(self, player: int, config: SimConfig, station: int = 240,
                 margin: int = 40, trigger: int | None = None, cooldown: int = 4):
        if player not in (1, 2):
            raise ValueError("player must be 1 or 2")
        if station <= 0 or margin < 0 or cooldown < 1:
            raise ValueError("bad spacing parameters")
        self.player = player
        self.config = config
        self.station = station
        self.margin = margin
        self.trigger = config.attack_range if trigger is None else trigger
        self.cooldown = cooldown
        self._timer = 0

    def __call__(self, state: GameState) -> Action:
        me, opp = ((state.p1, state.p2) if self.player == 1
                   else (state.p2, state.p1))
        d = abs(me.x - opp.x)
        if self._timer > 0:
            self._timer -= 1
        elif d <= self.trigger:
            self._timer = self.cooldown - 1
            return Action.ATTACK
        toward = Action.MOVE_RIGHT if opp.x > me.x else Action.MOVE_LEFT
        away = Action.MOVE_LEFT if toward is Action.MOVE_RIGHT else Action.MOVE_RIGHT
        if d > self.station:
            return toward
        if d < self.station - self.margin:
            return away
        return Action.IDLE


def make_policy(kind: str, player: int, config: SimConfig, **params):
    """Policy factory used by configuration files."""
    if kind == "idle":
        return idle_policy
    if kind == "aggressor":
        return AggressorPolicy(player, config, **params)
    if kind == "spacing":
        return SpacingOpponent(player, config, **params)
    raise ValueError(f"unknown policy kind {kind!r}")
