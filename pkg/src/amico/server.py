"""Live engine service: TCP and stdio line transports plus a WebSocket bridge.

One asyncio task owns the engine; all inbound event/control lines funnel
into its queue and are applied at tick boundaries in arrival order. Outbound
frame/cue lines fan out to per-subscriber buffered queues; a subscriber that
cannot keep up is disconnected rather than ever blocking the engine.

The WebSocket endpoint speaks plain RFC 6455 (no extensions) because the
deployment environment offers no websocket library; each WS text message
carries one protocol line, LF omitted.
"""

from __future__ import annotations

import asyncio
import base64
import dataclasses
import hashlib
import json
import logging
import re
import sys
import threading
from pathlib import Path
from typing import Awaitable, Callable, Optional

from .engine import (
    EmitLog,
    PlayCue,
    handle_event,
    initial_state,
    reset as reset_state,
    tick,
    tick_time_ms,
)
from .model import CobotEvent, EpisodeKind, EventName
from .profile import FeedbackProfile, load_profile, to_document
from .trace import encode_header, header_for
from .wire import (
    AckMsg,
    ControlMsg,
    CueMsg,
    E_EVENT_NAME,
    E_SCHEMA,
    ErrorMsg,
    EventMsg,
    WireError,
    WireMessage,
    encode,
    decode,
    event_message,
    frame_message,
)

logger = logging.getLogger("amico.server")

SUBSCRIBER_QUEUE_MAX = 512
_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class Subscriber:
    """Buffered outbound channel; overflow means the peer is too slow and
    gets dropped so the engine never blocks on it."""

    def __init__(self, name: str, write_line: Callable[[str], Awaitable[None]]):
        self.name = name
        self.queue: asyncio.Queue[Optional[str]] = asyncio.Queue(maxsize=SUBSCRIBER_QUEUE_MAX)
        self._write_line = write_line
        self.alive = True
        self.last_event_t = -1  # inbound timestamp monotonicity, per connection

    def try_send(self, line: str) -> bool:
        if not self.alive:
            return False
        try:
            self.queue.put_nowait(line)
            return True
        except asyncio.QueueFull:
            return False

    async def pump(self) -> None:
        while True:
            line = await self.queue.get()
            if line is None:
                return
            await self._write_line(line)

    def close(self) -> None:
        self.alive = False
        try:
            self.queue.put_nowait(None)
        except asyncio.QueueFull:
            # pump will die with the transport; nothing buffered matters now
            pass


class EngineServer:
    def __init__(
        self,
        profile: FeedbackProfile,
        *,
        trace_path: Optional[Path] = None,
        sessions_dir: Optional[Path] = None,
    ):
        self.state = initial_state(profile)
        self.trace_path = Path(trace_path) if trace_path else None
        self.sessions_dir = Path(sessions_dir) if sessions_dir else Path("sessions")
        self._inbound: asyncio.Queue[tuple[WireMessage, Optional[Subscriber]]] = asyncio.Queue()
        self._subscribers: set[Subscriber] = set()
        self._stop = asyncio.Event()
        self._stdin_eof = False
        self._stdio_mode = False
        self._trace_fh = None

    # ------------------------------------------------------------------
    # fan-out

    def _register(self, sub: Subscriber) -> None:
        self._subscribers.add(sub)

    def _unregister(self, sub: Subscriber) -> None:
        self._subscribers.discard(sub)
        sub.close()

    def _broadcast(self, line: str) -> None:
        dead = [sub for sub in self._subscribers if not sub.try_send(line)]
        for sub in dead:
            logger.warning("dropping slow subscriber %s", sub.name)
            self._unregister(sub)

    def _reply(self, origin: Optional[Subscriber], msg: WireMessage) -> None:
        if origin is not None and not origin.try_send(encode(msg)):
            self._unregister(origin)

    def _record(self, line: str) -> None:
        if self._trace_fh is not None:
            self._trace_fh.write(line)

    # ------------------------------------------------------------------
    # inbound handling (runs inside the tick task)

    def submit(self, msg: WireMessage, origin: Optional[Subscriber] = None) -> None:
        self._inbound.put_nowait((msg, origin))

    def handle_line(self, line: str, origin: Subscriber) -> None:
        """Decode and enqueue one inbound line; errors answer on that
        connection only and never touch engine state."""
        if not line.strip():
            return
        try:
            msg = decode(line)
        except WireError as exc:
            self._reply(origin, ErrorMsg(code=exc.code, message=exc.message))
            return
        if isinstance(msg, EventMsg):
            if msg.t_ms < origin.last_event_t:
                self._reply(
                    origin,
                    ErrorMsg(code=E_SCHEMA, message=f"non-monotonic event: t={msg.t_ms} after t={origin.last_event_t}"),
                )
                return
            origin.last_event_t = msg.t_ms
            self.submit(msg, origin)
        elif isinstance(msg, ControlMsg):
            self.submit(msg, origin)
        else:
            self._reply(
                origin,
                ErrorMsg(code=E_SCHEMA, message=f"only event and control lines are accepted inbound, got {type(msg).__name__}"),
            )

    def _apply_event(self, name: EventName, t_ms: int, cue_names: list[str]) -> bool:
        """Apply an event on the engine timeline. Returns True on shutdown."""
        event = CobotEvent(name=name, t_ms=t_ms)
        self._record(encode(event_message(event)))
        self.state, effects = handle_event(self.state, event)
        for effect in effects:
            if isinstance(effect, PlayCue):
                cue_names.append(effect.name)
            elif isinstance(effect, EmitLog):
                logger.info("%s", effect.text)
        return name is EventName.SHUTDOWN

    def _handle_control(self, msg: ControlMsg, origin: Optional[Subscriber], t_ms: int, cue_names: list[str]) -> bool:
        body = msg.body or {}
        if msg.op == "inject_event":
            name_raw = body.get("name")
            if not isinstance(name_raw, str) or name_raw not in set(e.value for e in EventName):
                self._reply(origin, ErrorMsg(code=E_EVENT_NAME, message=f"unknown event name {name_raw!r}"))
                return False
            shutdown = self._apply_event(EventName(name_raw), t_ms, cue_names)
            self._reply(origin, AckMsg(of="inject_event"))
            return shutdown

        if msg.op == "set_profile":
            if self._trace_fh is not None:
                self._reply(origin, ErrorMsg(code=E_SCHEMA, message="cannot hot-swap the profile while recording a trace"))
                return False
            try:
                new_profile = load_profile(json.dumps(body))
            except ValueError as exc:
                self._reply(origin, ErrorMsg(code=E_SCHEMA, message=f"invalid profile: {exc}"))
                return False
            kind = self.state.active_kind
            self.state = dataclasses.replace(self.state, profile=new_profile)
            if kind is not EpisodeKind.IDLE and not new_profile.episodes[kind].enabled:
                self.state = dataclasses.replace(self.state, active_kind=EpisodeKind.IDLE, fault_latched=False)
            logger.info("profile hot-swapped at t=%d", t_ms)
            self._reply(origin, AckMsg(of="set_profile"))
            return False

        if msg.op == "get_profile":
            self._reply(origin, AckMsg(of="get_profile", body=to_document(self.state.profile)))
            return False

        if msg.op == "save_session":
            session_id = body.get("session_id")
            records = body.get("records")
            if not isinstance(session_id, str) or not _SESSION_ID_RE.match(session_id):
                self._reply(origin, ErrorMsg(code=E_SCHEMA, message="save_session needs a session_id of [A-Za-z0-9_-]{1,64}"))
                return False
            if not isinstance(records, list):
                self._reply(origin, ErrorMsg(code=E_SCHEMA, message="save_session needs a records list"))
                return False
            self.sessions_dir.mkdir(parents=True, exist_ok=True)
            path = self.sessions_dir / f"{session_id}.json"
            path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n", encoding="utf-8")
            logger.info("session %s saved (%d records)", session_id, len(records))
            self._reply(origin, AckMsg(of="save_session", body={"path": str(path)}))
            return False

        if msg.op == "reset":
            self.state = reset_state(self.state)
            logger.info("engine reset at t=%d", t_ms)
            self._reply(origin, AckMsg(of="reset"))
            return False

        raise AssertionError(f"unhandled control op {msg.op}")  # decode() gates ops

    def _process_tick(self, t_ms: int) -> None:
        cue_names: list[str] = []
        shutdown = False
        while True:
            try:
                msg, origin = self._inbound.get_nowait()
            except asyncio.QueueEmpty:
                break
            if shutdown:
                continue  # drained but not applied
            if isinstance(msg, EventMsg):
                # the engine's own tick clock is the canonical timeline
                shutdown = self._apply_event(msg.name, t_ms, cue_names)
            elif isinstance(msg, ControlMsg):
                shutdown = self._handle_control(msg, origin, t_ms, cue_names)

        self.state, frame, effects = tick(self.state, t_ms)
        for effect in effects:
            if isinstance(effect, PlayCue):
                cue_names.append(effect.name)
            elif isinstance(effect, EmitLog):
                logger.info("%s", effect.text)
        for name in cue_names:
            line = encode(CueMsg(name=name, t_ms=t_ms))
            self._record(line)
            self._broadcast(line)
        line = encode(frame_message(frame))
        self._record(line)
        self._broadcast(line)
        if self._trace_fh is not None:
            self._trace_fh.flush()
        if shutdown:
            self._stop.set()

    # ------------------------------------------------------------------
    # tick loop

    async def run(self) -> None:
        loop = asyncio.get_running_loop()
        if self.trace_path is not None:
            self._trace_fh = open(self.trace_path, "w", encoding="utf-8")
            self._trace_fh.write(encode_header(header_for(self.state.profile)))
        base_wall = loop.time()
        base_ms = 0
        j = 0
        hz = self.state.profile.tick_hz
        try:
            while not self._stop.is_set():
                target = base_wall + tick_time_ms(j, hz) / 1000.0
                delay = target - loop.time()
                if delay > 0:
                    try:
                        await asyncio.wait_for(self._stop.wait(), timeout=delay)
                        break
                    except asyncio.TimeoutError:
                        pass
                t_ms = base_ms + tick_time_ms(j, hz)
                self._process_tick(t_ms)
                j += 1
                if self.state.profile.tick_hz != hz:
                    # profile swap changed the tick rate; rebase the schedule
                    base_ms, base_wall, j, hz = t_ms, target, 1, self.state.profile.tick_hz
                if (
                    self._stdio_mode
                    and self._stdin_eof
                    and self._inbound.empty()
                    and self.state.idle
                    and self.state.pending_reward == 0
                ):
                    self._stop.set()
        finally:
            if self._trace_fh is not None:
                self._trace_fh.close()
                self._trace_fh = None
            for sub in list(self._subscribers):
                self._unregister(sub)

    def request_stop(self) -> None:
        self._stop.set()

    # ------------------------------------------------------------------
    # TCP transport

    async def _handle_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = writer.get_extra_info("peername")

        async def write_line(line: str) -> None:
            writer.write(line.encode("utf-8"))
            await writer.drain()

        sub = Subscriber(name=f"tcp:{peer}", write_line=write_line)
        self._register(sub)
        pump = asyncio.create_task(sub.pump())
        try:
            while True:
                raw = await reader.readline()
                if not raw:
                    break
                self.handle_line(raw.decode("utf-8", errors="replace"), sub)
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            self._unregister(sub)
            pump.cancel()
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    async def start_tcp(self, host: str, port: int) -> asyncio.AbstractServer:
        return await asyncio.start_server(self._handle_tcp, host, port, limit=2**20)

    # ------------------------------------------------------------------
    # WebSocket transport

    async def _handle_ws(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = writer.get_extra_info("peername")
        try:
            await _ws_handshake(reader, writer)
        except (ValueError, ConnectionError, asyncio.IncompleteReadError) as exc:
            logger.debug("ws handshake failed from %s: %s", peer, exc)
            writer.close()
            return

        async def write_line(line: str) -> None:
            writer.write(_ws_frame(line.rstrip("\n").encode("utf-8")))
            await writer.drain()

        sub = Subscriber(name=f"ws:{peer}", write_line=write_line)
        self._register(sub)
        pump = asyncio.create_task(sub.pump())
        try:
            while True:
                text = await _ws_read_text(reader, writer)
                if text is None:
                    break
                self.handle_line(text + "\n", sub)
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            self._unregister(sub)
            pump.cancel()
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    async def start_ws(self, host: str, port: int) -> asyncio.AbstractServer:
        return await asyncio.start_server(self._handle_ws, host, port, limit=2**20)

    # ------------------------------------------------------------------
    # stdio transport

    async def run_stdio(self) -> None:
        """Engine loop reading lines from stdin and writing to stdout.

        Exits once stdin is exhausted and the engine has gone quiet.
        """
        self._stdio_mode = True
        loop = asyncio.get_running_loop()

        async def write_line(line: str) -> None:
            sys.stdout.write(line)
            sys.stdout.flush()

        sub = Subscriber(name="stdio", write_line=write_line)
        self._register(sub)
        pump = asyncio.create_task(sub.pump())

        def _read_stdin() -> None:
            for raw in sys.stdin:
                loop.call_soon_threadsafe(self.handle_line, raw, sub)
            loop.call_soon_threadsafe(self._mark_stdin_eof)

        threading.Thread(target=_read_stdin, daemon=True).start()
        try:
            await self.run()
        finally:
            pump.cancel()

    def _mark_stdin_eof(self) -> None:
        self._stdin_eof = True


# ---------------------------------------------------------------------------
# RFC 6455 plumbing


async def _ws_handshake(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
    request = await reader.readuntil(b"\r\n\r\n")
    lines = request.decode("latin-1").split("\r\n")
    headers = {}
    for header_line in lines[1:]:
        if ":" in header_line:
            name, _, value = header_line.partition(":")
            headers[name.strip().lower()] = value.strip()
    if "websocket" not in headers.get("upgrade", "").lower():
        raise ValueError("not a websocket upgrade request")
    key = headers.get("sec-websocket-key")
    if not key:
        raise ValueError("missing Sec-WebSocket-Key")
    accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()).decode("ascii")
    writer.write(
        (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
        ).encode("latin-1")
    )
    await writer.drain()


def _ws_frame(payload: bytes, opcode: int = 0x1) -> bytes:
    header = bytearray([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header.append(n)
    elif n < 65536:
        header.append(126)
        header += n.to_bytes(2, "big")
    else:
        header.append(127)
        header += n.to_bytes(8, "big")
    return bytes(header) + payload


async def _ws_read_text(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> Optional[str]:
    """Read one text message (handling fragmentation, ping and close)."""
    parts: list[bytes] = []
    while True:
        head = await reader.readexactly(2)
        fin = head[0] & 0x80
        opcode = head[0] & 0x0F
        masked = head[1] & 0x80
        length = head[1] & 0x7F
        if length == 126:
            length = int.from_bytes(await reader.readexactly(2), "big")
        elif length == 127:
            length = int.from_bytes(await reader.readexactly(8), "big")
        mask = await reader.readexactly(4) if masked else b""
        payload = await reader.readexactly(length)
        if mask:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:  # close
            writer.write(_ws_frame(payload[:2], opcode=0x8))
            await writer.drain()
            return None
        if opcode == 0x9:  # ping -> pong
            writer.write(_ws_frame(payload, opcode=0xA))
            await writer.drain()
            continue
        if opcode == 0xA:  # pong
            continue
        if opcode in (0x0, 0x1):
            parts.append(payload)
            if fin:
                return b"".join(parts).decode("utf-8", errors="replace")
            continue
        return None  # binary or reserved: close quietly


# ---------------------------------------------------------------------------
# entry point used by the CLI


async def serve(
    profile: FeedbackProfile,
    *,
    listen: Optional[tuple[str, int]] = None,
    ws: Optional[tuple[str, int]] = None,
    stdio: bool = False,
    trace_path: Optional[Path] = None,
    sessions_dir: Optional[Path] = None,
) -> int:
    """Run the engine with the requested transports until shutdown."""
    server = EngineServer(profile, trace_path=trace_path, sessions_dir=sessions_dir)
    tcp_server = ws_server = None
    if listen is not None:
        tcp_server = await server.start_tcp(*listen)
        logger.info("listening on %s:%d", *listen)
    if ws is not None:
        ws_server = await server.start_ws(*ws)
        logger.info("websocket bridge on %s:%d", *ws)
    try:
        if stdio:
            await server.run_stdio()
        else:
            await server.run()
    finally:
        for srv in (tcp_server, ws_server):
            if srv is not None:
                srv.close()
                await srv.wait_closed()
    return 0
