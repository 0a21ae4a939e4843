"""Adaptive background music toolkit.

Three instrument stems (drums, strings, others) play a looping score
whose per-stem volumes track a two-fighter duel: the strings follow
player 1's health, the others follow player 2's health, and the drums
follow the distance between the players.  The package bundles the duel
simulator, the threshold tables and wiring, a WAV renderer with
click-free gain ramps, standard audio feature extractors, a
least-squares decoder that recovers the game state back out of the
mixture, and an experiment harness comparing audio-informed play against
uninformed baselines.
"""

__version__ = "0.1.0"

from .audio import (AudioClip, GainAutomation, RenderConfig, RenderResult,
                    StemBank, gain_at, load_wav, render_mix, save_wav)
from .decoder import (BadWindowError, DecodedState, DecoderConfig,
                      IllConditionedError, TickGeometry, decode_trace,
                      decode_window, estimate_gains, nearest_level)
from .evaluate import (AudioInformedPolicy, EvalReport, ExperimentConfig,
                       avg_hp_diff, decoded_from_gains, run_experiment,
                       win_ratio)
from .features import (FeatureConfig, FeatureVector, extract, fft_magnitude,
                       frame_raw, mel_filterbank, mel_spectrogram)
from .fixtures import generate_stems, generate_verified_stems
from .mapping import (GainSchedule, LevelTable, MixDirective, VolumeMap,
                      default_volume_map, directive_for, level_bin,
                      level_lookup, load_volume_map, schedule_from_trace)
from .policies import AggressorPolicy, SpacingOpponent, idle_policy
from .sim import (Action, FighterState, GameState, RoundResult, SimConfig,
                  Winner, decide_winner, new_round, player_distance,
                  run_round, step)

__all__ = [
    "__version__",
    # sim
    "Action", "FighterState", "GameState", "RoundResult", "SimConfig",
    "Winner", "decide_winner", "new_round", "player_distance", "run_round",
    "step",
    # mapping
    "GainSchedule", "LevelTable", "MixDirective", "VolumeMap",
    "default_volume_map", "directive_for", "level_bin", "level_lookup",
    "load_volume_map", "schedule_from_trace",
    # audio
    "AudioClip", "GainAutomation", "RenderConfig", "RenderResult", "StemBank",
    "gain_at", "load_wav", "render_mix", "save_wav",
    # features
    "FeatureConfig", "FeatureVector", "extract", "fft_magnitude", "frame_raw",
    "mel_filterbank", "mel_spectrogram",
    # decoder
    "BadWindowError", "DecodedState", "DecoderConfig", "IllConditionedError",
    "TickGeometry", "decode_trace", "decode_window", "estimate_gains",
    "nearest_level",
    # evaluation
    "AudioInformedPolicy", "EvalReport", "ExperimentConfig", "avg_hp_diff",
    "decoded_from_gains", "run_experiment", "win_ratio",
    # policies & fixtures
    "AggressorPolicy", "SpacingOpponent", "idle_policy", "generate_stems",
    "generate_verified_stems",
]
