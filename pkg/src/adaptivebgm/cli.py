"""Command-line pipeline: simulate, mix, decode, features, evaluate, fixture.

Every artifact-producing command writes a `<output>.manifest.json`
sidecar recording the tool version, the fully resolved configuration and
SHA-256 digests of all inputs and outputs, so reruns can be verified
byte-for-byte.  Exit codes: 0 success, 2 usage or configuration error,
1 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .audio import RenderConfig, StemBank, load_wav, render_mix, save_wav
from .decoder import (DecoderConfig, TickGeometry, decode_table_to_text,
                      decode_trace)
from .evaluate import BGM_MODES, ExperimentConfig, run_experiment
from .features import KINDS, FeatureConfig, extract, feature_to_text
from .fixtures import generate_verified_stems, pairwise_correlations
from .mapping import (GainSchedule, MixDirective, default_volume_map,
                      load_volume_map, schedule_from_trace,
                      volume_map_to_config)
from .policies import make_policy
from .sim import SimConfig, run_round, trace_from_text, trace_to_text

STEM_FILES = ("drums.wav", "strings.wav", "others.wav")


class UsageError(Exception):
    """Bad arguments, configuration, or input files (exit code 2)."""


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return "sha256:" + digest.hexdigest()


def _write_manifest(out_path: Path, command: str, config: dict,
                    inputs: list[Path], outputs: list[Path],
                    extra: dict | None = None) -> Path:
    doc = {
        "tool": f"adaptivebgm {__version__}",
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in sorted(inputs)},
        "outputs": {str(p): _sha256(p) for p in sorted(outputs)},
    }
    if extra:
        doc.update(extra)
    manifest_path = Path(str(out_path) + ".manifest.json")
    manifest_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def _load_json(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: top level must be an object")
    return doc


def _dataclass_from(cls, obj: dict, context: str):
    valid = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(obj) - valid
    if unknown:
        raise UsageError(f"{context}: unknown keys {sorted(unknown)}")
    try:
        return cls(**obj)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{context}: {exc}") from exc


def _load_map(path: str | None):
    if path is None:
        return default_volume_map()
    try:
        return load_volume_map(path)
    except FileNotFoundError as exc:
        raise UsageError(f"map config not found: {path}") from exc
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad map config {path}: {exc}") from exc


def _load_stems(stems_dir: str) -> tuple[StemBank, list[Path]]:
    directory = Path(stems_dir)
    paths = [directory / name for name in STEM_FILES]
    for p in paths:
        if not p.is_file():
            raise UsageError(f"missing stem file: {p}")
    try:
        clips = [load_wav(p) for p in paths]
        bank = StemBank(drums=clips[0], strings=clips[1], others=clips[2])
    except ValueError as exc:
        raise UsageError(f"bad stem files in {stems_dir}: {exc}") from exc
    return bank, paths


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    doc = _load_json(Path(args.config)) if args.config else {}
    allowed = {"sim", "p1", "p2", "seed"}
    unknown = set(doc) - allowed
    if unknown:
        raise UsageError(f"simulate config: unknown keys {sorted(unknown)}")
    sim_obj = dict(doc.get("sim", {}))
    if args.seed is not None:
        sim_obj["seed"] = args.seed
    elif "seed" in doc:
        sim_obj.setdefault("seed", doc["seed"])
    config = _dataclass_from(SimConfig, sim_obj, "sim config")

    def policy_for(side: int, key: str):
        spec_obj = dict(doc.get(key, {"kind": "idle"}))
        kind = spec_obj.pop("kind", "idle")
        try:
            return make_policy(kind, side, config, **spec_obj), kind
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad policy {key!r}: {exc}") from exc

    policy1, kind1 = policy_for(1, "p1")
    policy2, kind2 = policy_for(2, "p2")

    trace = []
    result = run_round(policy1, policy2, config, trace.append)

    trace_path, result_path = Path(args.out_trace), Path(args.out_result)
    trace_path.write_text(trace_to_text(trace), encoding="utf-8")
    result_doc = {"winner": result.winner.value, "hp_self": result.hp_self,
                  "hp_opp": result.hp_opp, "ticks": result.ticks_elapsed}
    result_path.write_text(json.dumps(result_doc, indent=2) + "\n",
                           encoding="utf-8")
    resolved = {"sim": asdict(config), "p1": kind1, "p2": kind2}
    inputs = [Path(args.config)] if args.config else []
    _write_manifest(trace_path, "simulate", resolved, inputs,
                    [trace_path, result_path])
    return 0


# --------------------------------------------------------------------- mix

def cmd_mix(args) -> int:
    stems, stem_paths = _load_stems(args.stems)
    vmap = _load_map(args.map)
    render_obj = _load_json(Path(args.render)) if args.render else {}
    tick_rate = int(render_obj.pop("tick_rate", 60))
    if tick_rate <= 0:
        raise UsageError("tick_rate must be positive")
    render_config = _dataclass_from(RenderConfig, render_obj, "render config")

    trace_path = Path(args.trace)
    try:
        trace = trace_from_text(trace_path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise UsageError(f"trace file not found: {trace_path}") from exc
    except ValueError as exc:
        raise UsageError(f"malformed trace {trace_path}: {exc}") from exc

    if args.static:
        directives = tuple(MixDirective(tick=i, gain_strings=1.0,
                                        gain_others=1.0, gain_drums=1.0)
                           for i in range(len(trace)))
        schedule = GainSchedule(tick_rate=tick_rate, directives=directives)
    else:
        schedule = schedule_from_trace(trace, vmap, tick_rate=tick_rate)

    result = render_mix(stems, schedule, render_config)
    out_path = Path(args.out)
    save_wav(result.clip, out_path)
    print(f"clipped_samples={result.clipped_samples}", file=sys.stderr)

    geometry = TickGeometry.from_schedule(schedule, render_config)
    resolved = {"render": asdict(render_config), "tick_rate": tick_rate,
                "static": bool(args.static),
                "map": volume_map_to_config(vmap)}
    inputs = stem_paths + [trace_path]
    if args.map:
        inputs.append(Path(args.map))
    if args.render:
        inputs.append(Path(args.render))
    _write_manifest(out_path, "mix", resolved, inputs, [out_path], extra={
        "geometry": {
            "sample_rate": stems.sample_rate,
            "tick_rate": geometry.tick_rate,
            "n_ticks": geometry.n_ticks,
            "change_ticks": list(geometry.change_ticks),
            "ramp_ms": geometry.ramp_ms,
        },
        "clipped_samples": result.clipped_samples,
    })
    return 0


# ------------------------------------------------------------------ decode

def cmd_decode(args) -> int:
    mix_path = Path(args.mix)
    if not mix_path.is_file():
        raise UsageError(f"mix file not found: {mix_path}")
    manifest_path = Path(str(mix_path) + ".manifest.json")
    if not manifest_path.is_file():
        raise UsageError(f"missing manifest for tick geometry: {manifest_path}")
    manifest = _load_json(manifest_path)
    try:
        geo = manifest["geometry"]
        geometry = TickGeometry(tick_rate=int(geo["tick_rate"]),
                                n_ticks=int(geo["n_ticks"]),
                                change_ticks=tuple(int(t) for t in
                                                   geo["change_ticks"]),
                                ramp_ms=float(geo["ramp_ms"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{manifest_path}: bad geometry: {exc}") from exc

    stems, stem_paths = _load_stems(args.stems)
    vmap = _load_map(args.map)
    decoder_obj = _load_json(Path(args.decoder)) if args.decoder else {}
    decoder_config = _dataclass_from(DecoderConfig, decoder_obj,
                                     "decoder config")
    try:
        mix = load_wav(mix_path)
    except ValueError as exc:
        raise UsageError(f"bad mix file {mix_path}: {exc}") from exc

    decoded = decode_trace(mix, stems, geometry, vmap, decoder_config)

    out_path = Path(args.out)
    out_path.write_text(decode_table_to_text(decoded), encoding="utf-8")
    inputs = [mix_path, manifest_path] + stem_paths
    if args.map:
        inputs.append(Path(args.map))
    if args.decoder:
        inputs.append(Path(args.decoder))
    analyzed = sum(1 for d in decoded if d is not None)
    _write_manifest(out_path, "decode",
                    {"decoder": asdict(decoder_config),
                     "map": volume_map_to_config(vmap)},
                    inputs, [out_path],
                    extra={"ticks_analyzed": analyzed,
                           "ticks_skipped": len(decoded) - analyzed})
    return 0


# ---------------------------------------------------------------- features

def cmd_features(args) -> int:
    in_path = Path(args.input)
    if not in_path.is_file():
        raise UsageError(f"input file not found: {in_path}")
    config_obj = _load_json(Path(args.config)) if args.config else {}
    config = _dataclass_from(FeatureConfig, config_obj, "feature config")
    try:
        clip = load_wav(in_path)
    except ValueError as exc:
        raise UsageError(f"bad input wav {in_path}: {exc}") from exc
    fv = extract(clip, args.kind, config, start=args.start)
    out_path = Path(args.out)
    out_path.write_text(feature_to_text(fv), encoding="utf-8")
    inputs = [in_path] + ([Path(args.config)] if args.config else [])
    _write_manifest(out_path, "features",
                    {"kind": args.kind, "start": args.start,
                     "feature": asdict(config)},
                    inputs, [out_path])
    return 0


# ---------------------------------------------------------------- evaluate

def cmd_evaluate(args) -> int:
    doc = _load_json(Path(args.config)) if args.config else {}
    allowed = {"n_rounds", "bgm_mode", "encoder_kind", "seed", "sim",
               "decoder", "render", "map", "opponent"}
    unknown = set(doc) - allowed
    if unknown:
        raise UsageError(f"experiment config: unknown keys {sorted(unknown)}")

    kwargs = {}
    for key in ("n_rounds", "bgm_mode", "encoder_kind", "seed"):
        if key in doc:
            kwargs[key] = doc[key]
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if "sim" in doc:
        kwargs["sim"] = _dataclass_from(SimConfig, doc["sim"], "sim config")
    if "decoder" in doc:
        kwargs["decoder"] = _dataclass_from(DecoderConfig, doc["decoder"],
                                            "decoder config")
    if "render" in doc:
        kwargs["render"] = _dataclass_from(RenderConfig, doc["render"],
                                           "render config")
    if "map" in doc:
        map_doc = doc["map"]
        if not isinstance(map_doc, str):
            raise UsageError("experiment config: 'map' must be a path")
        kwargs["map"] = _load_map(map_doc)
    opponent = doc.get("opponent", {})
    if "kind" in opponent:
        kwargs["opponent_kind"] = opponent["kind"]
    if "station_range" in opponent:
        kwargs["station_range"] = tuple(opponent["station_range"])
    if "cooldown_range" in opponent:
        kwargs["cooldown_range"] = tuple(opponent["cooldown_range"])
    try:
        config = ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"experiment config: {exc}") from exc

    report = run_experiment(config)
    out_path = Path(args.out)
    out_path.write_text(report.to_json_text(), encoding="utf-8")
    print(report.summary_line())

    resolved = {
        "n_rounds": config.n_rounds, "bgm_mode": config.bgm_mode,
        "encoder_kind": config.encoder_kind, "seed": config.seed,
        "sim": asdict(config.sim), "decoder": asdict(config.decoder),
        "render": asdict(config.render),
        "map": volume_map_to_config(config.map),
        "opponent": {"kind": config.opponent_kind,
                     "station_range": list(config.station_range),
                     "cooldown_range": list(config.cooldown_range)},
    }
    inputs = [Path(args.config)] if args.config else []
    if isinstance(doc.get("map"), str):
        inputs.append(Path(doc["map"]))
    _write_manifest(out_path, "evaluate", resolved, inputs, [out_path])
    return 0


# ----------------------------------------------------------------- fixture

def cmd_fixture(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stems, used_seed = generate_verified_stems(args.seed,
                                               duration_seconds=args.duration)
    paths = []
    for name, clip in zip(STEM_FILES, stems.clips()):
        path = out_dir / name
        save_wav(clip, path)
        paths.append(path)
    correlations = pairwise_correlations(stems)
    _write_manifest(out_dir / "stems", "fixture",
                    {"seed": used_seed, "duration_seconds": args.duration,
                     "sample_rate": stems.sample_rate},
                    [], paths,
                    extra={"pairwise_correlations": correlations})
    return 0


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptivebgm",
        description="Adaptive background-music pipeline: simulate a duel, "
                    "render the state-driven mix, extract features, decode "
                    "the state back out of the audio, and run experiments.")
    parser.add_argument("--version", action="version",
                        version=f"adaptivebgm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one round and write its trace")
    p.add_argument("--config", help="JSON: {sim: {...}, p1: {...}, p2: {...}}")
    p.add_argument("--seed", type=int, help="override the sim seed")
    p.add_argument("--out-trace", required=True)
    p.add_argument("--out-result", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mix", help="render the adaptive mixture for a trace")
    p.add_argument("--stems", required=True,
                   help="directory with drums.wav, strings.wav, others.wav")
    p.add_argument("--trace", required=True)
    p.add_argument("--map", help="volume map JSON (default: built-in tables)")
    p.add_argument("--render", help="render config JSON")
    p.add_argument("--static", action="store_true",
                   help="constant gains 1.0, ignoring the trace")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("decode", help="recover state bins from a mixture")
    p.add_argument("--mix", required=True)
    p.add_argument("--stems", required=True)
    p.add_argument("--map", help="volume map JSON")
    p.add_argument("--decoder", help="decoder config JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("features", help="extract an audio feature matrix")
    p.add_argument("--input", required=True, help="input WAV")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--start", type=int, default=0,
                   help="frame start sample for raw/fft_mag")
    p.add_argument("--config", help="feature config JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("evaluate", help="run an experiment arm")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int, help="override the experiment seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fixture", help="generate synthetic test stems")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=10.0,
                   help="stem length in seconds")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
