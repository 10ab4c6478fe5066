"""Deterministic scripted cobot cell: seeded pick-and-place event traces.

The generator is a pure function of its config (seed included); the RNG is
SplitMix64, pinned so the same seed yields the same trace on any platform or
implementation. Draws are consumed in a fixed order per cycle - misplace,
fault, fault offset - and the offset draw is consumed even on fault-free
cycles, so extending the script later cannot silently shift old traces.
"""

from __future__ import annotations

import socket
import threading
import time
from dataclasses import dataclass

from .model import CobotEvent, EventName
from .wire import encode, event_message

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def rng_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (output, new_state).

    Reference vector: from state 0 the first output is 0xE220A8397B1DCDAF.
    """
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z, state


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        value, self.state = rng_next(self.state)
        return value

    def next_unit(self) -> float:
        """Uniform float in [0, 1)."""
        return self.next_u64() / 2.0**64

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound), exact integer arithmetic."""
        return (self.next_u64() * bound) >> 64


@dataclass(frozen=True)
class SimConfig:
    cycles: int
    search_ms: int = 2000
    assemble_ms: int = 6000
    p_fault: float = 0.05
    p_misplace: float = 0.15
    fault_ms: int = 8000
    misplace_extra_ms: int = 4000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.cycles < 1:
            raise ValueError(f"cycles must be >= 1, got {self.cycles}")
        for field_name in ("search_ms", "assemble_ms", "fault_ms", "misplace_extra_ms"):
            if getattr(self, field_name) < 1:
                raise ValueError(f"{field_name} must be >= 1")
        for field_name in ("p_fault", "p_misplace"):
            p = getattr(self, field_name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{field_name} must be in [0, 1], got {p}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 bits")


def run_script(config: SimConfig) -> list[CobotEvent]:
    """Generate the full event trace for a scripted run.

    Each cycle: search_started, then piece_detected after the search phase
    (extended by misplace_extra_ms on a misplacement draw), then
    assembly_completed after the assembly phase. A fault draw inserts
    fault/fault_cleared at a drawn offset inside the cycle and pauses the
    cycle clock for fault_ms. Timestamps are normalized to strictly increase
    (ties bumped forward 1 ms).
    """
    rng = SplitMix64(config.seed)
    raw: list[tuple[int, EventName]] = []
    t = 0
    for _ in range(config.cycles):
        u_misplace = rng.next_unit()
        u_fault = rng.next_unit()
        offset_draw = rng.next_u64()

        search_dur = config.search_ms
        if u_misplace < config.p_misplace:
            search_dur += config.misplace_extra_ms
        span = search_dur + config.assemble_ms
        cycle = [
            (t, EventName.SEARCH_STARTED),
            (t + search_dur, EventName.PIECE_DETECTED),
            (t + span, EventName.ASSEMBLY_COMPLETED),
        ]
        if u_fault < config.p_fault:
            fault_t = t + ((offset_draw * span) >> 64)
            before = [(et, name) for et, name in cycle if et < fault_t]
            after = [(et + config.fault_ms, name) for et, name in cycle if et >= fault_t]
            cycle = (
                before
                + [(fault_t, EventName.FAULT), (fault_t + config.fault_ms, EventName.FAULT_CLEARED)]
                + after
            )
        raw.extend(cycle)
        t = cycle[-1][0]  # next cycle starts at this assembly's completion

    events: list[CobotEvent] = []
    prev = -1
    for et, name in raw:
        if et <= prev:
            et = prev + 1
        prev = et
        events.append(CobotEvent(name=name, t_ms=et))
    return events


def run_live(config: SimConfig, address: str, speed: float = 1.0) -> int:
    """Stream a scripted run to a live engine over TCP at scaled real time.

    Returns 0 on completion, nonzero if the engine is unreachable or the
    connection drops mid-run.
    """
    if speed < 1.0:
        raise ValueError(f"speed multiplier must be >= 1, got {speed}")
    host, _, port_text = address.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        print(f"bad address {address!r}, expected host:port")
        return 2
    events = run_script(config)
    try:
        sock = socket.create_connection((host or "127.0.0.1", port), timeout=5.0)
    except OSError as exc:
        print(f"cannot reach engine at {address}: {exc}")
        return 3

    # The engine broadcasts frames back on the same connection; drain them so
    # the socket buffer never backs up and gets us disconnected as a slow
    # subscriber.
    def _drain() -> None:
        try:
            while sock.recv(65536):
                pass
        except OSError:
            pass

    threading.Thread(target=_drain, daemon=True).start()

    start = time.monotonic()
    try:
        for event in events:
            target = start + event.t_ms / 1000.0 / speed
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            sock.sendall(encode(event_message(event)).encode("utf-8"))
    except OSError as exc:
        print(f"connection lost: {exc}")
        return 3
    finally:
        try:
            sock.shutdown(socket.SHUT_WR)
        except OSError:
            pass
        sock.close()
    return 0
