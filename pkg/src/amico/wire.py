"""Newline-delimited JSON wire protocol, version 1.

One message per line: canonical JSON (sorted keys, no spaces) terminated by
LF. Decoding is strict: unknown types, unknown fields, wrong version, bad
pixel payloads and unknown event names are all rejected with a stable error
code, which keeps golden traces honest.
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass
from typing import Any, Optional, Union

from .model import Color, CobotEvent, EventName, Frame, GridGeometry

PROTOCOL_VERSION = 1

CONTROL_OPS = frozenset({"inject_event", "set_profile", "get_profile", "save_session", "reset"})

E_VERSION = "E_VERSION"
E_SCHEMA = "E_SCHEMA"
E_PIXELS = "E_PIXELS"
E_EVENT_NAME = "E_EVENT_NAME"


class WireError(ValueError):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    @property
    def message(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class EventMsg:
    name: EventName
    t_ms: int


@dataclass(frozen=True)
class ControlMsg:
    op: str
    body: Optional[dict] = None


@dataclass(frozen=True)
class FrameMsg:
    t_ms: int
    w: int
    h: int
    px: bytes  # row-major RGB, 3 bytes per pixel


@dataclass(frozen=True)
class CueMsg:
    name: str
    t_ms: int


@dataclass(frozen=True)
class AckMsg:
    of: str
    body: Optional[dict] = None


@dataclass(frozen=True)
class ErrorMsg:
    code: str
    message: str


WireMessage = Union[EventMsg, ControlMsg, FrameMsg, CueMsg, AckMsg, ErrorMsg]


def event_message(event: CobotEvent) -> EventMsg:
    return EventMsg(name=event.name, t_ms=event.t_ms)


def frame_message(frame: Frame) -> FrameMsg:
    return FrameMsg(
        t_ms=frame.t_ms,
        w=frame.geometry.width,
        h=frame.geometry.height,
        px=frame.to_rgb_bytes(),
    )


def frame_from_message(msg: FrameMsg) -> Frame:
    geometry = GridGeometry(msg.w, msg.h)
    pixels = tuple(
        Color(msg.px[i], msg.px[i + 1], msg.px[i + 2]) for i in range(0, len(msg.px), 3)
    )
    return Frame(geometry=geometry, pixels=pixels, t_ms=msg.t_ms)


def _payload(msg: WireMessage) -> dict[str, Any]:
    if isinstance(msg, EventMsg):
        return {"type": "event", "name": msg.name.value, "t_ms": msg.t_ms}
    if isinstance(msg, ControlMsg):
        d: dict[str, Any] = {"type": "control", "op": msg.op}
        if msg.body is not None:
            d["body"] = msg.body
        return d
    if isinstance(msg, FrameMsg):
        return {
            "type": "frame",
            "t_ms": msg.t_ms,
            "w": msg.w,
            "h": msg.h,
            "px": base64.b64encode(msg.px).decode("ascii"),
        }
    if isinstance(msg, CueMsg):
        return {"type": "cue", "name": msg.name, "t_ms": msg.t_ms}
    if isinstance(msg, AckMsg):
        d = {"type": "ack", "of": msg.of}
        if msg.body is not None:
            d["body"] = msg.body
        return d
    if isinstance(msg, ErrorMsg):
        return {"type": "error", "code": msg.code, "message": msg.message}
    raise TypeError(f"not a wire message: {msg!r}")


def encode(msg: WireMessage) -> str:
    """Single canonical JSON line, LF-terminated."""
    payload = _payload(msg)
    payload["v"] = PROTOCOL_VERSION
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _require(obj: dict, allowed: set[str], required: set[str]) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise WireError(E_SCHEMA, f"unknown fields: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise WireError(E_SCHEMA, f"missing fields: {sorted(missing)}")


def _int_field(obj: dict, key: str, minimum: int = 0) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise WireError(E_SCHEMA, f"{key} must be an integer >= {minimum}, got {v!r}")
    return v


def _str_field(obj: dict, key: str) -> str:
    v = obj.get(key)
    if not isinstance(v, str) or not v:
        raise WireError(E_SCHEMA, f"{key} must be a non-empty string, got {v!r}")
    return v


def decode(line: str) -> WireMessage:
    """Parse one wire line; raises WireError with a stable code on anything off."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireError(E_SCHEMA, f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise WireError(E_SCHEMA, "message must be a JSON object")
    if "v" not in obj:
        raise WireError(E_SCHEMA, "missing protocol version field 'v'")
    if obj["v"] != PROTOCOL_VERSION:
        raise WireError(E_VERSION, f"unsupported protocol version {obj['v']!r}")
    mtype = obj.get("type")

    if mtype == "event":
        _require(obj, {"v", "type", "name", "t_ms"}, {"name", "t_ms"})
        name = obj["name"]
        if not isinstance(name, str) or name not in set(e.value for e in EventName):
            raise WireError(E_EVENT_NAME, f"unknown event name {name!r}")
        return EventMsg(name=EventName(name), t_ms=_int_field(obj, "t_ms"))

    if mtype == "control":
        _require(obj, {"v", "type", "op", "body"}, {"op"})
        op = _str_field(obj, "op")
        if op not in CONTROL_OPS:
            raise WireError(E_SCHEMA, f"unknown control op {op!r}")
        body = obj.get("body")
        if body is not None and not isinstance(body, dict):
            raise WireError(E_SCHEMA, "control body must be an object")
        return ControlMsg(op=op, body=body)

    if mtype == "frame":
        _require(obj, {"v", "type", "t_ms", "w", "h", "px"}, {"t_ms", "w", "h", "px"})
        w = _int_field(obj, "w", minimum=1)
        h = _int_field(obj, "h", minimum=1)
        px_b64 = _str_field(obj, "px")
        try:
            px = base64.b64decode(px_b64, validate=True)
        except (binascii.Error, ValueError):
            raise WireError(E_SCHEMA, "px is not valid base64") from None
        if len(px) != w * h * 3:
            raise WireError(E_PIXELS, f"px decodes to {len(px)} bytes, expected {w * h * 3}")
        return FrameMsg(t_ms=_int_field(obj, "t_ms"), w=w, h=h, px=px)

    if mtype == "cue":
        _require(obj, {"v", "type", "name", "t_ms"}, {"name", "t_ms"})
        return CueMsg(name=_str_field(obj, "name"), t_ms=_int_field(obj, "t_ms"))

    if mtype == "ack":
        _require(obj, {"v", "type", "of", "body"}, {"of"})
        body = obj.get("body")
        if body is not None and not isinstance(body, dict):
            raise WireError(E_SCHEMA, "ack body must be an object")
        return AckMsg(of=_str_field(obj, "of"), body=body)

    if mtype == "error":
        _require(obj, {"v", "type", "code", "message"}, {"code", "message"})
        return ErrorMsg(code=_str_field(obj, "code"), message=_str_field(obj, "message"))

    raise WireError(E_SCHEMA, f"unknown message type {mtype!r}")
