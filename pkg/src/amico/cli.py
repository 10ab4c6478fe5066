"""Operator command line.

Exit codes, uniform across commands: 0 success, 1 verification mismatch,
2 usage or validation error, 3 environment or I/O failure.
"""

from __future__ import annotations

import argparse
import asyncio
import dataclasses
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import audio as audio_mod
from .model import EpisodeKind, GridGeometry
from .patterns import episode_frame
from .profile import (
    FeedbackProfile,
    ProfileError,
    default_profile,
    load_profile,
    validate,
)
from .render import render_ascii
from .sim import SimConfig, run_live, run_script
from .trace import (
    HeaderMismatchError,
    TraceFormatError,
    encode_header,
    events_only_trace,
    header_for,
    read_trace,
    replay,
    write_trace,
)
from .server import serve
from .wire import FrameMsg, decode, frame_from_message

PROFILE_ENV = "AMICO_PROFILE"

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _load_profile_arg(args: argparse.Namespace) -> FeedbackProfile:
    """Resolve the effective profile: --profile flag, AMICO_PROFILE env var,
    or factory defaults; then apply --geometry/--tick overrides."""
    path = getattr(args, "profile", None) or os.environ.get(PROFILE_ENV)
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_USAGE, f"cannot read profile {path}: {exc}") from None
        try:
            profile = load_profile(text)
        except ProfileError as exc:
            report = "\n".join(f"  {issue}" for issue in exc.issues)
            raise CliError(EXIT_USAGE, f"profile {path} is invalid:\n{report}") from None
    else:
        profile = default_profile()
    if getattr(args, "geometry", None):
        try:
            geometry = GridGeometry.parse(args.geometry)
        except ValueError as exc:
            raise CliError(EXIT_USAGE, str(exc)) from None
        profile = dataclasses.replace(profile, geometry=geometry)
    if getattr(args, "tick", None):
        if args.tick < 1:
            raise CliError(EXIT_USAGE, f"--tick must be >= 1, got {args.tick}")
        profile = dataclasses.replace(profile, tick_hz=args.tick)
    return profile


def _parse_address(text: str) -> tuple[str, int]:
    host, _, port_text = text.rpartition(":")
    try:
        return host or "127.0.0.1", int(port_text)
    except ValueError:
        raise CliError(EXIT_USAGE, f"bad address {text!r}, expected host:port") from None


# ---------------------------------------------------------------------------
# commands


def _cmd_run(args: argparse.Namespace) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    profile = _load_profile_arg(args)
    listen = None if args.stdio else _parse_address(args.listen)
    ws = None if args.stdio else _parse_address(args.ws)
    try:
        return asyncio.run(
            serve(
                profile,
                listen=listen,
                ws=ws,
                stdio=args.stdio,
                trace_path=Path(args.trace) if args.trace else None,
                sessions_dir=Path(args.sessions_dir) if args.sessions_dir else None,
            )
        )
    except KeyboardInterrupt:
        return EXIT_OK
    except OSError as exc:
        _err(f"cannot bind: {exc}")
        return EXIT_IO


def _cmd_simulate(args: argparse.Namespace) -> int:
    profile = _load_profile_arg(args)
    try:
        config = SimConfig(
            cycles=args.cycles,
            search_ms=args.search_ms,
            assemble_ms=args.assemble_ms,
            p_fault=args.p_fault,
            p_misplace=args.p_misplace,
            fault_ms=args.fault_ms,
            misplace_extra_ms=args.misplace_extra_ms,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    events = run_script(config)
    if args.out:
        try:
            write_trace(args.out, events_only_trace(profile, events, seed=config.seed))
        except OSError as exc:
            _err(f"cannot write {args.out}: {exc}")
            return EXIT_IO
        print(f"wrote {len(events)} events to {args.out}", file=sys.stderr)
    if args.attach:
        return run_live(config, args.attach, speed=args.speed)
    if not args.out:
        for event in events:
            print(f"{event.t_ms:>10d}  {event.name.value}")
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    profile = _load_profile_arg(args)
    try:
        header, body = read_trace(args.trace)
    except OSError as exc:
        _err(f"cannot read {args.trace}: {exc}")
        return EXIT_IO
    except TraceFormatError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    try:
        result = replay(profile, header, body)
    except HeaderMismatchError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    except TraceFormatError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None

    if args.render == "ascii":
        for line in result.regenerated:
            msg = decode(line)
            if isinstance(msg, FrameMsg):
                print(f"t={msg.t_ms} ms")
                print(render_ascii(frame_from_message(msg)))
    if args.out:
        try:
            write_trace(args.out, _full_trace_lines(profile, header, result.regenerated))
        except OSError as exc:
            _err(f"cannot write {args.out}: {exc}")
            return EXIT_IO
    if not result.ok:
        _err(f"replay diverged at line {result.first_divergence_line}: {result.detail}")
        return EXIT_MISMATCH
    print("replay ok", file=sys.stderr)
    return EXIT_OK


def _full_trace_lines(profile: FeedbackProfile, header, regenerated: list[str]) -> list[str]:
    return [encode_header(header_for(profile, seed=header.seed))] + regenerated


def _cmd_validate_profile(args: argparse.Namespace) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
    except OSError as exc:
        _err(f"cannot read {args.path}: {exc}")
        return EXIT_IO
    try:
        profile = load_profile(text)
    except ProfileError as exc:
        _err(f"{args.path}: {len(exc.issues)} problem(s)")
        for issue in exc.issues:
            _err(f"  {issue}")
        return EXIT_USAGE
    issues = validate(profile)
    if issues:
        for issue in issues:
            _err(f"  {issue}")
        return EXIT_USAGE
    print(f"{args.path}: ok")
    return EXIT_OK


def _cmd_render(args: argparse.Namespace) -> int:
    profile = _load_profile_arg(args)
    try:
        kind = EpisodeKind(args.episode)
    except ValueError:
        raise CliError(
            EXIT_USAGE, f"unknown episode {args.episode!r}; one of {[k.value for k in EpisodeKind]}"
        ) from None
    if args.elapsed < 0:
        raise CliError(EXIT_USAGE, "--elapsed must be >= 0")
    frame = episode_frame(kind, profile, profile.geometry, args.elapsed)
    print(f"{kind.value} at {args.elapsed} ms on {profile.geometry}:")
    print(render_ascii(frame), end="")
    return EXIT_OK


def _cmd_export_audio(args: argparse.Namespace) -> int:
    profile = _load_profile_arg(args)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _err(f"cannot create {out_dir}: {exc}")
        return EXIT_IO
    specs = {}
    for kind in (
        EpisodeKind.SYSTEM_ERROR,
        EpisodeKind.SEARCHING,
        EpisodeKind.CONFIRMATION,
        EpisodeKind.WORKFLOW_REWARD,
    ):
        spec = profile.cue_spec(kind)
        if spec is not None:
            specs[spec.name] = spec
    for name, spec in sorted(specs.items()):
        buffer = audio_mod.synthesize(spec, args.sample_rate)
        path = out_dir / f"{name}.wav"
        try:
            audio_mod.write_wav(buffer, path)
        except OSError as exc:
            _err(f"cannot write {path}: {exc}")
            return EXIT_IO
        print(f"wrote {path} ({len(buffer)} samples)", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amico",
        description="Cobot feedback engine: LED-matrix patterns and audio cues from activity events.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_profile_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--profile", help=f"profile JSON path (default: ${PROFILE_ENV} or built-in defaults)")
        p.add_argument("--geometry", help="override matrix geometry, e.g. 8x24")
        p.add_argument("--tick", type=int, help="override tick rate in Hz")

    p_run = sub.add_parser("run", help="run the live engine with TCP and WebSocket endpoints")
    add_profile_flags(p_run)
    p_run.add_argument("--listen", default="127.0.0.1:7777", help="TCP line-protocol address")
    p_run.add_argument("--ws", default="127.0.0.1:7778", help="WebSocket bridge address")
    p_run.add_argument("--stdio", action="store_true", help="serve on stdin/stdout instead of sockets")
    p_run.add_argument("--trace", help="record a replayable trace to this path")
    p_run.add_argument("--sessions-dir", help="directory for questionnaire session files")
    p_run.set_defaults(func=_cmd_run)

    p_sim = sub.add_parser("simulate", help="generate a deterministic pick-and-place event trace")
    add_profile_flags(p_sim)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--cycles", type=int, default=10)
    p_sim.add_argument("--p-fault", type=float, default=0.05, dest="p_fault")
    p_sim.add_argument("--p-misplace", type=float, default=0.15, dest="p_misplace")
    p_sim.add_argument("--search-ms", type=int, default=2000, dest="search_ms")
    p_sim.add_argument("--assemble-ms", type=int, default=6000, dest="assemble_ms")
    p_sim.add_argument("--fault-ms", type=int, default=8000, dest="fault_ms")
    p_sim.add_argument("--misplace-extra-ms", type=int, default=4000, dest="misplace_extra_ms")
    p_sim.add_argument("--out", help="write an events-only trace file")
    p_sim.add_argument("--attach", help="also stream the events to a live engine at host:port")
    p_sim.add_argument("--speed", type=float, default=1.0, help="real-time multiplier for --attach")
    p_sim.set_defaults(func=_cmd_simulate)

    p_replay = sub.add_parser("replay", help="re-run a trace and verify the output byte-for-byte")
    add_profile_flags(p_replay)
    p_replay.add_argument("--trace", required=True)
    p_replay.add_argument("--render", choices=["ascii", "none"], default="none")
    p_replay.add_argument("--out", help="write the regenerated full trace here")
    p_replay.set_defaults(func=_cmd_replay)

    p_validate = sub.add_parser("validate-profile", help="check a profile document")
    p_validate.add_argument("path")
    p_validate.set_defaults(func=_cmd_validate_profile)

    p_render = sub.add_parser("render", help="print one episode frame as glyph art")
    add_profile_flags(p_render)
    p_render.add_argument("--episode", required=True)
    p_render.add_argument("--elapsed", type=int, default=0, help="milliseconds since episode start")
    p_render.set_defaults(func=_cmd_render)

    p_audio = sub.add_parser("export-audio", help="write the profile's cues as WAV files")
    add_profile_flags(p_audio)
    p_audio.add_argument("--out-dir", default="cues")
    p_audio.add_argument("--sample-rate", type=int, default=audio_mod.DEFAULT_SAMPLE_RATE)
    p_audio.set_defaults(func=_cmd_export_audio)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _err(str(exc))
        return exc.code
    except BrokenPipeError:
        # downstream (head, less) closed the pipe; suppress the shutdown flush
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
