"""Trace persistence and deterministic replay.

A trace file is a header line followed by wire-message lines in emission
order: inbound events as they were applied, then per tick any cue lines and
exactly one frame line. Re-feeding the event lines through an engine with the
same profile reproduces the output byte-for-byte; that property is the
backbone of the golden-trace tests.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

from .engine import (
    EngineState,
    PlayCue,
    handle_event,
    initial_state,
    tick,
    tick_time_ms,
)
from .model import CobotEvent, EventName, GridGeometry
from .profile import FeedbackProfile, profile_hash
from .wire import CueMsg, EventMsg, FrameMsg, decode, encode, event_message, frame_message

TRACE_VERSION = 1


class TraceFormatError(ValueError):
    pass


class HeaderMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TraceHeader:
    profile_hash: str
    geometry: GridGeometry
    tick_hz: int
    seed: Optional[int] = None
    v: int = TRACE_VERSION


def header_for(profile: FeedbackProfile, seed: Optional[int] = None) -> TraceHeader:
    return TraceHeader(
        profile_hash=profile_hash(profile),
        geometry=profile.geometry,
        tick_hz=profile.tick_hz,
        seed=seed,
    )


def encode_header(header: TraceHeader) -> str:
    payload: dict = {
        "v": header.v,
        "profile_hash": header.profile_hash,
        "geometry": str(header.geometry),
        "tick_hz": header.tick_hz,
    }
    if header.seed is not None:
        payload["seed"] = header.seed
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def decode_header(line: str) -> TraceHeader:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"invalid header: {exc}") from None
    if not isinstance(obj, dict):
        raise TraceFormatError("header must be a JSON object")
    allowed = {"v", "profile_hash", "geometry", "tick_hz", "seed"}
    unknown = set(obj) - allowed
    if unknown:
        raise TraceFormatError(f"unknown header fields: {sorted(unknown)}")
    for key in ("v", "profile_hash", "geometry", "tick_hz"):
        if key not in obj:
            raise TraceFormatError(f"header missing field {key!r}")
    if obj["v"] != TRACE_VERSION:
        raise TraceFormatError(f"unsupported trace version {obj['v']!r}")
    return TraceHeader(
        profile_hash=obj["profile_hash"],
        geometry=GridGeometry.parse(obj["geometry"]),
        tick_hz=obj["tick_hz"],
        seed=obj.get("seed"),
    )


# ---------------------------------------------------------------------------
# deterministic offline run


def _settled(state: EngineState) -> bool:
    """True when no further transition can happen without a new event."""
    if state.idle:
        return state.pending_reward == 0
    return state.profile.episodes[state.active_kind].finite_span_ms() is None


def run_lines(
    profile: FeedbackProfile,
    events: Iterable[CobotEvent],
    until_ms: Optional[int] = None,
) -> list[str]:
    """Drive a virtual-clock engine over an event list; return the emitted
    wire lines (event echoes, cues, frames) in order.

    Ticks advance at the profile's rate from t=0. Events apply at the first
    tick at or after their timestamp, in arrival order. Without ``until_ms``
    the run stops once no events remain and the engine has settled: idle with
    nothing queued, or holding an episode that never self-finishes (a latched
    fault, an endless search) - an empty event list therefore emits nothing,
    and every event list terminates. With ``until_ms`` the clock runs through
    exactly that time, idle or not - replay uses this to regenerate a
    recorded session of known length.
    """
    pending = list(events)
    state: EngineState = initial_state(profile)
    lines: list[str] = []
    idx = 0
    k = 0
    while True:
        now = tick_time_ms(k, profile.tick_hz)
        if until_ms is not None:
            if now > until_ms:
                break
        elif idx >= len(pending) and _settled(state):
            break
        cue_names: list[str] = []
        saw_shutdown = False
        while idx < len(pending) and pending[idx].t_ms <= now:
            event = pending[idx]
            idx += 1
            lines.append(encode(event_message(event)))
            state, effects = handle_event(state, event)
            cue_names.extend(e.name for e in effects if isinstance(e, PlayCue))
            if event.name is EventName.SHUTDOWN:
                saw_shutdown = True
                break  # later events are not processed
        state, frame, effects = tick(state, now)
        cue_names.extend(e.name for e in effects if isinstance(e, PlayCue))
        for name in cue_names:
            lines.append(encode(CueMsg(name=name, t_ms=now)))
        lines.append(encode(frame_message(frame)))
        if saw_shutdown:
            break
        k += 1
    return lines


def record(
    profile: FeedbackProfile, events: Iterable[CobotEvent], seed: Optional[int] = None
) -> list[str]:
    """Full trace: header line plus the deterministic run's wire lines."""
    return [encode_header(header_for(profile, seed))] + run_lines(profile, events)


def events_only_trace(
    profile: FeedbackProfile, events: Iterable[CobotEvent], seed: Optional[int] = None
) -> list[str]:
    """Trace containing just the header and event lines (a simulator export)."""
    return [encode_header(header_for(profile, seed))] + [
        encode(event_message(e)) for e in events
    ]


# ---------------------------------------------------------------------------
# replay


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    regenerated: list[str]  # full body lines (no header)
    first_divergence_line: Optional[int] = None  # 1-based line number in the file
    detail: str = ""


def _event_from_line(msg: EventMsg) -> CobotEvent:
    return CobotEvent(name=msg.name, t_ms=msg.t_ms)


def replay(profile: FeedbackProfile, header: TraceHeader, body: list[str]) -> ReplayResult:
    """Re-feed a trace's event lines through a fresh engine and compare.

    The header must match the current profile (hash, geometry, tick rate);
    otherwise the replay refuses outright. Comparison is byte-for-byte over
    the whole body. A trace with no recorded output lines (a simulator
    export) has nothing to verify and succeeds, returning the regenerated
    lines so the caller can persist a full trace.
    """
    current = header_for(profile)
    problems = []
    if header.profile_hash != current.profile_hash:
        problems.append(f"profile hash {header.profile_hash[:12]}… != current {current.profile_hash[:12]}…")
    if header.geometry != current.geometry:
        problems.append(f"geometry {header.geometry} != current {current.geometry}")
    if header.tick_hz != current.tick_hz:
        problems.append(f"tick_hz {header.tick_hz} != current {current.tick_hz}")
    if problems:
        raise HeaderMismatchError("trace header does not match engine config: " + "; ".join(problems))

    events: list[CobotEvent] = []
    last_frame_ms: Optional[int] = None
    for line in body:
        msg = decode(line)
        if isinstance(msg, EventMsg):
            events.append(_event_from_line(msg))
        elif isinstance(msg, FrameMsg):
            last_frame_ms = msg.t_ms
        elif not isinstance(msg, CueMsg):
            raise TraceFormatError(f"unexpected message in trace body: {line.strip()!r}")

    if last_frame_ms is None:
        # a simulator export: nothing recorded to verify, regenerate naturally
        return ReplayResult(ok=True, regenerated=run_lines(profile, events))
    regenerated = run_lines(profile, events, until_ms=last_frame_ms)

    for i, (got, want) in enumerate(zip(regenerated, body)):
        if got != want:
            return ReplayResult(
                ok=False,
                regenerated=regenerated,
                first_divergence_line=i + 2,  # +1 for header, +1 for 1-based
                detail=f"expected {want.strip()!r}, regenerated {got.strip()!r}",
            )
    if len(regenerated) != len(body):
        shorter = min(len(regenerated), len(body))
        return ReplayResult(
            ok=False,
            regenerated=regenerated,
            first_divergence_line=shorter + 2,
            detail=f"recorded {len(body)} lines, regenerated {len(regenerated)}",
        )
    return ReplayResult(ok=True, regenerated=regenerated)


# ---------------------------------------------------------------------------
# files


def write_trace(path: Union[str, Path], lines: list[str]) -> None:
    Path(path).write_text("".join(lines), encoding="utf-8")


def read_trace(path: Union[str, Path]) -> tuple[TraceHeader, list[str]]:
    text = Path(path).read_text(encoding="utf-8")
    raw = text.splitlines(keepends=True)
    if not raw:
        raise TraceFormatError("trace file is empty")
    header = decode_header(raw[0])
    body = []
    for line in raw[1:]:
        if line.strip():
            body.append(line if line.endswith("\n") else line + "\n")
    return header, body
