"""Tour of the light patterns: what the tower shows for each episode kind.

Run:  python demos/01_patterns.py
"""

from amico import EpisodeKind, default_profile, episode_frame
from amico.render import render_ascii

profile = default_profile()
geometry = profile.geometry
print(f"tower geometry: {geometry} (row 0 = top, bottom row faces the worktable)\n")

# A fault shows a red X blinking three times (400 ms on / 200 ms off),
# then holds solid until the fault clears.
print("=== system_error: red X ===")
for t in (0, 500, 600):
    state = "on" if episode_frame(EpisodeKind.SYSTEM_ERROR, profile, geometry, t).lit_set() else "off"
    print(f"t={t:4d} ms -> {state}")
print(render_ascii(episode_frame(EpisodeKind.SYSTEM_ERROR, profile, geometry, 0)))

# While the cobot searches for a piece, orange chevrons point down at the
# worktable, blinking at 1 Hz until the piece is found.
print("=== searching: down chevrons ===")
print(render_ascii(episode_frame(EpisodeKind.SEARCHING, profile, geometry, 0)))

# Correct placement flashes the whole matrix green once, for 600 ms.
print("=== confirmation: full green flash ===")
frame = episode_frame(EpisodeKind.CONFIRMATION, profile, geometry, 0)
print(f"lit pixels: {len(frame.lit_set())} of {geometry.pixel_count}")
print(f"color of (0,0): {frame.pixel(0, 0)}")

# Every 10 completed assemblies the tower plays a scrolling rainbow with a
# dark shadow band, so the reward reads differently from the green flash
# even with color information removed.
print("\n=== workflow_reward: rainbow with scrolling shadow ===")
for t in (0, 375, 750):
    frame = episode_frame(EpisodeKind.WORKFLOW_REWARD, profile, geometry, t)
    dark_rows = sorted({r for r in range(geometry.height)} - {r for _, r in frame.lit_set()})
    print(f"t={t:4d} ms  dark rows: {dark_rows}")
