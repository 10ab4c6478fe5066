"""amico: multimodal feedback engine for collaborative robot cells.

Translates cobot activity events into LED-matrix light patterns and audio
cues in real time, with a deterministic simulator, a replayable wire
protocol, and a customizable feedback profile format.
"""

from .audio import CueSpec, PcmBuffer, default_cues, synthesize, write_wav
from .engine import (
    EngineState,
    handle_event,
    initial_state,
    reset,
    tick,
    tick_time_ms,
)
from .model import (
    BLACK,
    CobotEvent,
    Color,
    EpisodeKind,
    EventName,
    Frame,
    GridGeometry,
    blank_frame,
    priority_of,
)
from .patterns import (
    BlinkSchedule,
    ShapeKind,
    chevron_pixels,
    episode_frame,
    hsv_to_rgb,
    x_shape,
)
from .profile import (
    FeedbackProfile,
    ProfileError,
    default_profile,
    load_profile,
    profile_hash,
    save_profile,
    validate,
)
from .sim import SimConfig, SplitMix64, rng_next, run_script

__version__ = "0.1.0"

__all__ = [
    "BLACK",
    "BlinkSchedule",
    "CobotEvent",
    "Color",
    "CueSpec",
    "EngineState",
    "EpisodeKind",
    "EventName",
    "FeedbackProfile",
    "Frame",
    "GridGeometry",
    "PcmBuffer",
    "ProfileError",
    "ShapeKind",
    "SimConfig",
    "SplitMix64",
    "blank_frame",
    "chevron_pixels",
    "default_cues",
    "default_profile",
    "episode_frame",
    "handle_event",
    "hsv_to_rgb",
    "initial_state",
    "load_profile",
    "priority_of",
    "profile_hash",
    "reset",
    "rng_next",
    "run_script",
    "save_profile",
    "synthesize",
    "tick",
    "tick_time_ms",
    "validate",
    "write_wav",
    "x_shape",
]
