"""Terminal rendering of frames: one block glyph per lit pixel."""

from __future__ import annotations

from .model import Frame

LIT_GLYPH = "█"  # full block
DARK_GLYPH = "."


def render_ascii(frame: Frame) -> str:
    """Draw a frame as height rows of width glyphs, top row first."""
    w = frame.geometry.width
    rows = []
    for r in range(frame.geometry.height):
        rows.append(
            "".join(
                LIT_GLYPH if frame.pixels[r * w + c].is_lit() else DARK_GLYPH
                for c in range(w)
            )
        )
    return "\n".join(rows) + "\n"
