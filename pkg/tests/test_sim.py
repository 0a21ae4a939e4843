import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptivebgm.policies import AggressorPolicy, idle_policy
from adaptivebgm.sim import (Action, FighterState, GameState, RoundOverError,
                             SimConfig, Winner, decide_winner, new_round,
                             player_distance, run_round, step, trace_from_text,
                             trace_to_text, TRACE_HEADER)

CFG = SimConfig()

actions = st.sampled_from(list(Action))


def state_with(hp1=400, hp2=400, x1=80, x2=720, tick=0, limit=3600):
    return GameState(tick=tick, p1=FighterState(hp=hp1, x=x1),
                     p2=FighterState(hp=hp2, x=x2), limit_ticks=limit)


class TestNewRound:
    def test_defaults(self):
        state = new_round(CFG)
        assert state.p1.hp == 400 and state.p2.hp == 400
        assert state.tick == 0
        assert (state.p1.x, state.p2.x) == (80, 720)
        assert player_distance(state) == 640

    def test_deterministic(self):
        assert new_round(CFG) == new_round(SimConfig())

    @pytest.mark.parametrize("field", ["stage_width", "tick_rate",
                                       "round_seconds", "attack_range",
                                       "attack_damage", "move_speed",
                                       "start_separation"])
    def test_rejects_nonpositive_config(self, field):
        with pytest.raises(ValueError):
            SimConfig(**{field: 0})

    def test_rejects_separation_wider_than_stage(self):
        with pytest.raises(ValueError):
            SimConfig(stage_width=700, start_separation=701)


class TestPlayerDistance:
    def test_plain(self):
        assert player_distance(state_with(x1=100, x2=500)) == 400

    def test_overlap(self):
        assert player_distance(state_with(x1=250, x2=250)) == 0

    def test_clamp_boundary(self):
        assert player_distance(state_with(x1=0, x2=800)) == 800

    def test_clamps_beyond_800(self):
        wide = state_with(x1=0, x2=1000)
        assert player_distance(wide) == 800

    @given(st.integers(0, 800), st.integers(0, 800))
    @settings(max_examples=100, deadline=None)
    def test_symmetric(self, x1, x2):
        assert (player_distance(state_with(x1=x1, x2=x2))
                == player_distance(state_with(x1=x2, x2=x1)))


class TestDecideWinner:
    def test_ko_before_limit(self):
        assert decide_winner(state_with(hp1=0, hp2=50, tick=100)) is Winner.P2
        assert decide_winner(state_with(hp1=50, hp2=0, tick=100)) is Winner.P1

    def test_double_ko_is_draw(self):
        assert decide_winner(state_with(hp1=0, hp2=0, tick=100)) is Winner.DRAW

    def test_timeout_higher_hp_wins(self):
        assert decide_winner(state_with(hp1=200, hp2=150, tick=3600)) is Winner.P1
        assert decide_winner(state_with(hp1=150, hp2=200, tick=3600)) is Winner.P2

    def test_timeout_equal_hp_draws(self):
        assert decide_winner(state_with(hp1=100, hp2=100, tick=3600)) is Winner.DRAW

    def test_ongoing(self):
        assert decide_winner(state_with(tick=10)) is Winner.ONGOING


class TestStep:
    def test_idle_only_advances_tick(self):
        state = new_round(CFG)
        after = step(state, Action.IDLE, Action.IDLE, CFG)
        assert after.tick == 1
        assert (after.p1.hp, after.p2.hp) == (400, 400)
        assert (after.p1.x, after.p2.x) == (80, 720)

    def test_attack_out_of_range_misses(self):
        state = new_round(CFG)  # distance 640 > 120
        after = step(state, Action.ATTACK, Action.IDLE, CFG)
        assert after.p2.hp == 400

    def test_attack_in_range_lands(self):
        state = state_with(x1=300, x2=400)  # distance 100 <= 120
        after = step(state, Action.ATTACK, Action.IDLE, CFG)
        assert after.p2.hp == 390
        assert after.p1.hp == 400

    def test_guard_blocks(self):
        state = state_with(x1=300, x2=400)
        after = step(state, Action.ATTACK, Action.GUARD, CFG)
        assert after.p2.hp == 400
        assert after.p2.guard

    def test_mutual_attacks_both_land(self):
        state = state_with(x1=300, x2=400)
        after = step(state, Action.ATTACK, Action.ATTACK, CFG)
        assert (after.p1.hp, after.p2.hp) == (390, 390)

    def test_simultaneous_ko_is_draw(self):
        state = state_with(hp1=10, hp2=10, x1=300, x2=400)
        after = step(state, Action.ATTACK, Action.ATTACK, CFG)
        assert (after.p1.hp, after.p2.hp) == (0, 0)
        assert decide_winner(after) is Winner.DRAW

    def test_range_checked_after_movement(self):
        # p2 steps out of reach on the same tick p1 swings.
        state = state_with(x1=300, x2=418)  # 118 now, 126 after p2 retreats
        after = step(state, Action.ATTACK, Action.MOVE_RIGHT, CFG)
        assert after.p2.hp == 400

    def test_positions_clamp_to_stage(self):
        state = state_with(x1=4, x2=796)
        after = step(state, Action.MOVE_LEFT, Action.MOVE_RIGHT, CFG)
        assert (after.p1.x, after.p2.x) == (0, 800)

    def test_stepping_finished_round_raises(self):
        done = state_with(hp1=0, hp2=100)
        with pytest.raises(RoundOverError):
            step(done, Action.IDLE, Action.IDLE, CFG)

    @given(st.lists(st.tuples(actions, actions), min_size=1, max_size=200))
    @settings(max_examples=50, deadline=None)
    def test_invariants_over_random_play(self, pairs):
        state = new_round(CFG)
        for a1, a2 in pairs:
            if decide_winner(state) is not Winner.ONGOING:
                break
            nxt = step(state, a1, a2, CFG)
            assert nxt.p1.hp <= state.p1.hp and nxt.p2.hp <= state.p2.hp
            assert 0 <= nxt.p1.x <= CFG.stage_width
            assert 0 <= nxt.p2.x <= CFG.stage_width
            assert 0 <= player_distance(nxt) <= 800
            assert nxt.tick == state.tick + 1
            state = nxt

    @given(st.lists(st.tuples(actions, actions), min_size=1, max_size=60))
    @settings(max_examples=30, deadline=None)
    def test_step_is_deterministic(self, pairs):
        def play():
            state = new_round(CFG)
            for a1, a2 in pairs:
                if decide_winner(state) is not Winner.ONGOING:
                    break
                state = step(state, a1, a2, CFG)
            return state
        assert play() == play()


class TestRunRound:
    def test_attacker_beats_idle_in_expected_ticks(self):
        # 65 ticks to close 640 -> 120 at 8 px/tick, then 40 hits of 10.
        result = run_round(AggressorPolicy(1, CFG), idle_policy, CFG)
        assert result.winner is Winner.P1
        assert result.hp_opp == 0
        assert result.hp_self == 400
        approach = math.ceil((CFG.start_separation - CFG.attack_range)
                             / CFG.move_speed)
        hits = math.ceil(400 / CFG.attack_damage)
        assert result.ticks_elapsed == approach + hits == 105

    def test_idle_vs_idle_draws_at_limit(self):
        trace = []
        result = run_round(idle_policy, idle_policy, CFG, trace.append)
        assert result.winner is Winner.DRAW
        assert result.ticks_elapsed == 3600
        assert len(trace) == 3600
        assert trace[0].tick == 0 and trace[-1].tick == 3599

    def test_traces_are_reproducible(self):
        def play():
            trace = []
            run_round(AggressorPolicy(1, CFG), AggressorPolicy(2, CFG),
                      CFG, trace.append)
            return trace
        assert play() == play()

    def test_policy_failure_propagates(self):
        def broken(state):
            raise RuntimeError("policy crashed")
        with pytest.raises(RuntimeError, match="policy crashed"):
            run_round(broken, idle_policy, CFG)


class TestTraceFormat:
    def test_roundtrip(self):
        trace = []
        run_round(AggressorPolicy(1, CFG), idle_policy, CFG, trace.append)
        text = trace_to_text(trace)
        assert text.splitlines()[0] == TRACE_HEADER
        parsed = trace_from_text(text)
        assert len(parsed) == len(trace)
        for a, b in zip(parsed, trace):
            assert (a.tick, a.p1.hp, a.p2.hp, a.p1.x, a.p2.x) == \
                   (b.tick, b.p1.hp, b.p2.hp, b.p1.x, b.p2.x)

    def test_rejects_bad_header(self):
        with pytest.raises(ValueError):
            trace_from_text("nope\n1,2,3,4,5\n")

    def test_rejects_wrong_field_count(self):
        with pytest.raises(ValueError):
            trace_from_text(TRACE_HEADER + "\n1,2,3\n")

    def test_rejects_non_integer(self):
        with pytest.raises(ValueError):
            trace_from_text(TRACE_HEADER + "\n0,400,400,80,x\n")

    def test_rejects_empty_body(self):
        with pytest.raises(ValueError):
            trace_from_text(TRACE_HEADER + "\n")
