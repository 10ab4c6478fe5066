"""Shared domain vocabulary: cobot events, episode kinds, colors, grids, frames.

All types here are immutable values; they are safe to copy between threads
and async tasks without synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache


class EventName(str, Enum):
    """Activity notifications the cobot cell can emit."""

    FAULT = "fault"
    FAULT_CLEARED = "fault_cleared"
    SEARCH_STARTED = "search_started"
    PIECE_DETECTED = "piece_detected"
    ASSEMBLY_COMPLETED = "assembly_completed"
    RUNNING = "running"
    SHUTDOWN = "shutdown"


EVENT_NAMES = frozenset(e.value for e in EventName)


@dataclass(frozen=True)
class CobotEvent:
    """A timestamped activity notification from the cobot cell.

    ``t_ms`` is integer milliseconds since engine start; streams must be
    monotone non-decreasing (enforced by the orchestrator, not here).
    """

    name: EventName
    t_ms: int

    def __post_init__(self) -> None:
        if not isinstance(self.name, EventName):
            object.__setattr__(self, "name", EventName(self.name))
        if self.t_ms < 0:
            raise ValueError(f"event t_ms must be >= 0, got {self.t_ms}")


class EpisodeKind(str, Enum):
    """One bounded feedback behavior; idle renders an all-off matrix."""

    SYSTEM_ERROR = "system_error"
    SEARCHING = "searching"
    CONFIRMATION = "confirmation"
    WORKFLOW_REWARD = "workflow_reward"
    IDLE = "idle"


# Preemption order: faults beat searching beats the two priority-1 episodes,
# which never preempt each other and queue instead.
PRIORITY: dict[EpisodeKind, int] = {
    EpisodeKind.SYSTEM_ERROR: 3,
    EpisodeKind.SEARCHING: 2,
    EpisodeKind.CONFIRMATION: 1,
    EpisodeKind.WORKFLOW_REWARD: 1,
    EpisodeKind.IDLE: 0,
}


def priority_of(kind: EpisodeKind) -> int:
    """Fixed preemption level for an episode kind. Pure and total."""
    return PRIORITY[kind]


@dataclass(frozen=True)
class Color:
    """One RGB pixel, channels 0..255."""

    r: int
    g: int
    b: int

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= 255:
                raise ValueError(f"color channel {name}={v!r} outside 0..255")

    def is_lit(self) -> bool:
        return (self.r, self.g, self.b) != (0, 0, 0)


BLACK = Color(0, 0, 0)


@dataclass(frozen=True)
class GridGeometry:
    """LED matrix dimensions. Row 0 is the top; row height-1 faces the worktable."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"geometry must be at least 1x1, got {self.width}x{self.height}")

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"

    @classmethod
    def parse(cls, text: str) -> "GridGeometry":
        """Parse a "WxH" string such as "8x24"."""
        try:
            w, h = text.lower().split("x")
            return cls(int(w), int(h))
        except ValueError:
            raise ValueError(f"geometry must look like WxH, got {text!r}") from None


DEFAULT_GEOMETRY = GridGeometry(width=8, height=24)


@dataclass(frozen=True)
class Frame:
    """One full refresh of the matrix: row-major pixels, length width*height."""

    geometry: GridGeometry
    pixels: tuple[Color, ...]
    t_ms: int

    def __post_init__(self) -> None:
        if len(self.pixels) != self.geometry.pixel_count:
            raise ValueError(
                f"frame has {len(self.pixels)} pixels, geometry "
                f"{self.geometry} needs {self.geometry.pixel_count}"
            )

    def pixel(self, col: int, row: int) -> Color:
        return self.pixels[row * self.geometry.width + col]

    def lit_set(self) -> frozenset[tuple[int, int]]:
        """Binarized view: the set of (col, row) whose pixel is not black."""
        w = self.geometry.width
        return frozenset(
            (i % w, i // w) for i, px in enumerate(self.pixels) if px.is_lit()
        )

    def to_rgb_bytes(self) -> bytes:
        """Row-major RGB byte string, 3 bytes per pixel."""
        out = bytearray()
        for px in self.pixels:
            out.append(px.r)
            out.append(px.g)
            out.append(px.b)
        return bytes(out)


@lru_cache(maxsize=64)
def _black_pixels(count: int) -> tuple[Color, ...]:
    return (BLACK,) * count


def blank_frame(geometry: GridGeometry, t_ms: int) -> Frame:
    """All-off frame; this is what idle renders."""
    return Frame(geometry=geometry, pixels=_black_pixels(geometry.pixel_count), t_ms=t_ms)
