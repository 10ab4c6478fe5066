"""Pattern synthesis: pure functions from (episode, profile, geometry, time) to frames.

Every generator is parametric in geometry and deterministic, so frames are
bit-exact across runs; the orchestrator and the golden-trace machinery rely
on that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING, Literal, Union

from .model import BLACK, Color, EpisodeKind, Frame, GridGeometry, blank_frame

if TYPE_CHECKING:
    from .profile import FeedbackProfile

# The reward rainbow scrolls one full cycle every RAINBOW_PERIOD_MS; the top
# quarter of the cycle renders dark so the pattern stays distinguishable from
# a full fill even with color information removed (the scrolling "shadow").
RAINBOW_PERIOD_MS = 1500
RAINBOW_SHADOW_FRACTION = 0.25

DEFAULT_CHEVRON_SPACING = 4


class ShapeKind(str, Enum):
    X_CROSS = "x_cross"
    DOWN_CHEVRONS = "down_chevrons"
    FULL_FILL = "full_fill"
    RAINBOW_SCROLL = "rainbow_scroll"
    OFF = "off"


Repeats = Union[int, Literal["infinite"]]


@dataclass(frozen=True)
class BlinkSchedule:
    """On/off timing for a blinking pattern.

    ``repeats`` counts full on+off periods; after a finite schedule elapses the
    pattern either holds solid-on (``hold_after``) or goes dark.
    """

    on_ms: int
    off_ms: int = 0
    repeats: Repeats = "infinite"
    hold_after: bool = False

    def __post_init__(self) -> None:
        if self.on_ms < 1:
            raise ValueError(f"on_ms must be >= 1, got {self.on_ms}")
        if self.off_ms < 0:
            raise ValueError(f"off_ms must be >= 0, got {self.off_ms}")
        if self.repeats != "infinite" and (not isinstance(self.repeats, int) or self.repeats < 1):
            raise ValueError(f"repeats must be a positive integer or 'infinite', got {self.repeats!r}")

    @property
    def period_ms(self) -> int:
        return self.on_ms + self.off_ms

    def is_on(self, elapsed_ms: int) -> bool:
        if elapsed_ms < 0:
            raise ValueError("elapsed_ms must be >= 0")
        if self.repeats != "infinite" and elapsed_ms >= self.repeats * self.period_ms:
            return self.hold_after
        return elapsed_ms % self.period_ms < self.on_ms

    def finite_span_ms(self) -> int | None:
        """Total time until the schedule self-finishes, or None if it never does."""
        if self.repeats == "infinite" or self.hold_after:
            return None
        return self.repeats * self.period_ms


def round_half_away(x: float) -> int:
    """Round half away from zero; used everywhere a real maps to a channel byte."""
    if x >= 0:
        return math.floor(x + 0.5)
    return math.ceil(x - 0.5)


def hsv_to_rgb(hue_deg: float, sat: float, val: float) -> Color:
    """Piecewise HSV to RGB, channels scaled to 0..255 and rounded half away from zero."""
    if not 0.0 <= hue_deg < 360.0:
        raise ValueError(f"hue must be in [0, 360), got {hue_deg}")
    if not 0.0 <= sat <= 1.0 or not 0.0 <= val <= 1.0:
        raise ValueError(f"sat and val must be in [0, 1], got sat={sat} val={val}")
    c = val * sat
    x = c * (1.0 - abs((hue_deg / 60.0) % 2.0 - 1.0))
    m = val - c
    sector = int(hue_deg // 60.0) % 6
    rgb = (
        (c, x, 0.0),
        (x, c, 0.0),
        (0.0, c, x),
        (0.0, x, c),
        (x, 0.0, c),
        (c, 0.0, x),
    )[sector]
    return Color(*(round_half_away((ch + m) * 255.0) for ch in rgb))


@lru_cache(maxsize=256)
def x_shape(geometry: GridGeometry) -> frozenset[tuple[int, int]]:
    """Both diagonals of the centered SxS square, S = min(width, height).

    Pixel count is 2S minus one when S is odd (the diagonals share the center).
    """
    s = min(geometry.width, geometry.height)
    ox = (geometry.width - s) // 2
    oy = (geometry.height - s) // 2
    pixels = set()
    for i in range(s):
        pixels.add((ox + i, oy + i))
        pixels.add((ox + s - 1 - i, oy + i))
    return frozenset(pixels)


@lru_cache(maxsize=256)
def chevron_pixels(
    geometry: GridGeometry, spacing: int = DEFAULT_CHEVRON_SPACING
) -> frozenset[tuple[int, int]]:
    """Down-pointing chevrons stacked upward from the worktable edge.

    Column c dips by d(c) = floor(|2c - (width-1)| / 2) below the chevron's
    apex row; apexes sit at height-1, height-1-spacing, ... while the whole
    chevron still fits above row 0. On narrow-but-wide grids no apex fits and
    the set is empty.
    """
    if spacing < 1:
        raise ValueError(f"spacing must be >= 1, got {spacing}")
    w, h = geometry.width, geometry.height
    depth = [abs(2 * c - (w - 1)) // 2 for c in range(w)]
    max_depth = max(depth)
    pixels = set()
    apex = h - 1
    while apex - max_depth >= 0:
        for c in range(w):
            pixels.add((c, apex - depth[c]))
        apex -= spacing
    return frozenset(pixels)


def rainbow_row_color(row: int, height: int, elapsed_ms: int) -> Color:
    """Hue for one row of the scrolling reward rainbow, dark inside the shadow band."""
    # reduce time modulo the period first so the pattern is exactly periodic
    # and float precision cannot drift on long timestamps
    phase = (row / height + (elapsed_ms % RAINBOW_PERIOD_MS) / RAINBOW_PERIOD_MS) % 1.0
    if phase >= 1.0 - RAINBOW_SHADOW_FRACTION:
        return BLACK
    return hsv_to_rgb(360.0 * phase, 1.0, 1.0)


class EpisodeDisabledError(Exception):
    """Raised when a frame is requested for an episode the profile disables."""


@lru_cache(maxsize=512)
def _shape_pixels(
    shape: ShapeKind, geometry: GridGeometry, color: Color
) -> tuple[Color, ...]:
    """Full pixel tuple for a static shape in a single color."""
    if shape is ShapeKind.FULL_FILL:
        return (color,) * geometry.pixel_count
    if shape is ShapeKind.OFF:
        return (BLACK,) * geometry.pixel_count
    if shape is ShapeKind.X_CROSS:
        lit = x_shape(geometry)
    elif shape is ShapeKind.DOWN_CHEVRONS:
        lit = chevron_pixels(geometry)
    else:
        raise ValueError(f"{shape} is not a static single-color shape")
    pixels = [BLACK] * geometry.pixel_count
    for col, row in lit:
        pixels[row * geometry.width + col] = color
    return tuple(pixels)


def _rainbow_pixels(geometry: GridGeometry, elapsed_ms: int) -> tuple[Color, ...]:
    rows = [rainbow_row_color(r, geometry.height, elapsed_ms) for r in range(geometry.height)]
    pixels: list[Color] = []
    for row_color in rows:
        pixels.extend((row_color,) * geometry.width)
    return tuple(pixels)


def episode_frame(
    kind: EpisodeKind,
    profile: "FeedbackProfile",
    geometry: GridGeometry,
    elapsed_ms: int,
) -> Frame:
    """Render the frame an episode shows ``elapsed_ms`` after it started.

    Pure: identical arguments yield bit-identical frames.
    """
    if elapsed_ms < 0:
        raise ValueError("elapsed_ms must be >= 0")
    if kind is EpisodeKind.IDLE:
        return blank_frame(geometry, elapsed_ms)
    style = profile.episodes[kind]
    if not style.enabled:
        raise EpisodeDisabledError(f"episode {kind.value} is disabled in the profile")

    if style.shape is ShapeKind.RAINBOW_SCROLL:
        if style.duration_ms is not None and elapsed_ms >= style.duration_ms:
            return blank_frame(geometry, elapsed_ms)
        return Frame(geometry=geometry, pixels=_rainbow_pixels(geometry, elapsed_ms), t_ms=elapsed_ms)

    schedule = style.schedule
    if schedule is not None and not schedule.is_on(elapsed_ms):
        return blank_frame(geometry, elapsed_ms)
    return Frame(
        geometry=geometry,
        pixels=_shape_pixels(style.shape, geometry, style.color),
        t_ms=elapsed_ms,
    )
