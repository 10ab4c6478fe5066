"""Feedback profiles: the user-facing customization document.

A profile maps each episode kind to its appearance (shape, color, timing,
cue) plus the global geometry, tick rate and reward threshold. Profiles are
JSON documents; loading is strict (unknown fields rejected, every violation
reported with a field path) and saving is canonical (sorted keys, 2-space
indent, LF) so that serialized profiles are byte-stable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Union

from .audio import CueSpec, default_cues
from .model import Color, EpisodeKind, GridGeometry
from .patterns import BlinkSchedule, ShapeKind

PROFILE_VERSION = 1

# Episode kinds that carry a profile entry; idle is the absence of feedback.
CONFIGURABLE_KINDS = (
    EpisodeKind.SYSTEM_ERROR,
    EpisodeKind.SEARCHING,
    EpisodeKind.CONFIRMATION,
    EpisodeKind.WORKFLOW_REWARD,
)


@dataclass(frozen=True)
class ProfileIssue:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ProfileError(ValueError):
    """Raised when a profile document fails to parse or validate."""

    def __init__(self, issues: list[ProfileIssue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


@dataclass(frozen=True)
class EpisodeStyle:
    """Appearance of one episode kind.

    Exactly one of ``schedule`` (blink timing) or ``duration_ms`` (plain
    timed display, used by the rainbow reward) is set. ``cue`` is either a
    built-in cue name or an inline CueSpec.
    """

    enabled: bool
    shape: ShapeKind
    color: Color
    schedule: BlinkSchedule | None = None
    duration_ms: int | None = None
    cue: Union[str, CueSpec] = ""

    def __post_init__(self) -> None:
        if (self.schedule is None) == (self.duration_ms is None):
            raise ValueError("exactly one of schedule or duration_ms must be set")
        if self.duration_ms is not None and self.duration_ms < 1:
            raise ValueError(f"duration_ms must be >= 1, got {self.duration_ms}")

    def finite_span_ms(self) -> int | None:
        """How long the episode runs before finishing on its own, if ever."""
        if self.duration_ms is not None:
            return self.duration_ms
        assert self.schedule is not None
        return self.schedule.finite_span_ms()

    def cue_name(self) -> str:
        return self.cue.name if isinstance(self.cue, CueSpec) else self.cue


@dataclass(frozen=True)
class FeedbackProfile:
    geometry: GridGeometry
    tick_hz: int
    reward_threshold: int
    episodes: dict[EpisodeKind, EpisodeStyle] = field(compare=True)

    def __post_init__(self) -> None:
        if self.tick_hz < 1:
            raise ValueError(f"tick_hz must be >= 1, got {self.tick_hz}")
        if self.reward_threshold < 1:
            raise ValueError(f"reward_threshold must be >= 1, got {self.reward_threshold}")
        missing = [k.value for k in CONFIGURABLE_KINDS if k not in self.episodes]
        if missing:
            raise ValueError(f"profile is missing episode entries: {missing}")

    def cue_spec(self, kind: EpisodeKind) -> CueSpec | None:
        """Resolve the cue for an episode kind to a concrete CueSpec."""
        style = self.episodes[kind]
        if isinstance(style.cue, CueSpec):
            return style.cue
        return default_cues().get(style.cue)


def default_profile() -> FeedbackProfile:
    """Factory defaults: 8x24 tower, 30 Hz, reward every 10 assemblies."""
    return FeedbackProfile(
        geometry=GridGeometry(8, 24),
        tick_hz=30,
        reward_threshold=10,
        episodes={
            EpisodeKind.SYSTEM_ERROR: EpisodeStyle(
                enabled=True,
                shape=ShapeKind.X_CROSS,
                color=Color(255, 0, 0),
                schedule=BlinkSchedule(on_ms=400, off_ms=200, repeats=3, hold_after=True),
                cue="error",
            ),
            EpisodeKind.SEARCHING: EpisodeStyle(
                enabled=True,
                shape=ShapeKind.DOWN_CHEVRONS,
                color=Color(255, 100, 0),
                schedule=BlinkSchedule(on_ms=500, off_ms=500, repeats="infinite"),
                cue="suspense",
            ),
            EpisodeKind.CONFIRMATION: EpisodeStyle(
                enabled=True,
                shape=ShapeKind.FULL_FILL,
                color=Color(0, 255, 0),
                schedule=BlinkSchedule(on_ms=600, off_ms=0, repeats=1, hold_after=False),
                cue="confirmation",
            ),
            EpisodeKind.WORKFLOW_REWARD: EpisodeStyle(
                enabled=True,
                shape=ShapeKind.RAINBOW_SCROLL,
                color=Color(255, 255, 255),  # ignored by the rainbow renderer
                duration_ms=3000,
                cue="victory",
            ),
        },
    )


def _cross_issues(episodes: dict[EpisodeKind, EpisodeStyle]) -> list[ProfileIssue]:
    issues: list[ProfileIssue] = []
    by_shape: dict[ShapeKind, list[str]] = {}
    for kind, style in episodes.items():
        if style.enabled:
            by_shape.setdefault(style.shape, []).append(kind.value)
        if isinstance(style.cue, str) and style.cue not in default_cues():
            issues.append(
                ProfileIssue(
                    f"episodes.{kind.value}.cue",
                    f"unknown cue name {style.cue!r}; built-ins: {sorted(default_cues())}",
                )
            )
    for shape, kinds in sorted(by_shape.items()):
        if len(kinds) > 1:
            issues.append(
                ProfileIssue(
                    "episodes",
                    f"episodes {kinds} share shape {shape.value!r}; enabled episodes "
                    "need distinct shapes to stay distinguishable without color",
                )
            )
    return issues


def validate(profile: FeedbackProfile) -> list[ProfileIssue]:
    """Cross-field checks; constructor invariants are assumed to hold already.

    The big one: enabled episodes must use pairwise-distinct shapes, so the
    episode kinds stay distinguishable with color information removed.
    """
    return _cross_issues(profile.episodes)


# ---------------------------------------------------------------------------
# document (de)serialization


def _expect_keys(obj: dict, allowed: set[str], required: set[str], path: str, issues: list[ProfileIssue]) -> bool:
    ok = True
    for key in sorted(set(obj) - allowed):
        issues.append(ProfileIssue(f"{path}.{key}" if path else key, "unknown field"))
        ok = False
    for key in sorted(required - set(obj)):
        issues.append(ProfileIssue(f"{path}.{key}" if path else key, "missing required field"))
        ok = False
    return ok


def _parse_int(obj: dict, key: str, path: str, issues: list[ProfileIssue], minimum: int | None = None) -> int | None:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        issues.append(ProfileIssue(f"{path}.{key}" if path else key, f"expected an integer, got {v!r}"))
        return None
    if minimum is not None and v < minimum:
        issues.append(ProfileIssue(f"{path}.{key}" if path else key, f"must be >= {minimum}, got {v}"))
        return None
    return v


def _parse_color(raw: Any, path: str, issues: list[ProfileIssue]) -> Color | None:
    if (
        not isinstance(raw, list)
        or len(raw) != 3
        or any(not isinstance(ch, int) or isinstance(ch, bool) for ch in raw)
    ):
        issues.append(ProfileIssue(path, f"expected [r, g, b] integers, got {raw!r}"))
        return None
    for i, ch in enumerate(raw):
        if not 0 <= ch <= 255:
            issues.append(ProfileIssue(f"{path}[{i}]", f"channel {ch} outside 0..255"))
            return None
    return Color(*raw)


def _parse_schedule(
    raw: Any, path: str, issues: list[ProfileIssue]
) -> tuple[BlinkSchedule | None, int | None]:
    if not isinstance(raw, dict):
        issues.append(ProfileIssue(path, f"expected an object, got {raw!r}"))
        return None, None
    if "duration_ms" in raw:
        if not _expect_keys(raw, {"duration_ms"}, {"duration_ms"}, path, issues):
            return None, None
        dur = _parse_int(raw, "duration_ms", path, issues, minimum=1)
        return None, dur
    if not _expect_keys(raw, {"on_ms", "off_ms", "repeats", "hold_after"}, {"on_ms"}, path, issues):
        return None, None
    on_ms = _parse_int(raw, "on_ms", path, issues, minimum=1)
    off_ms = _parse_int(raw, "off_ms", path, issues, minimum=0) if "off_ms" in raw else 0
    repeats: Any = raw.get("repeats", "infinite")
    if repeats != "infinite" and (not isinstance(repeats, int) or isinstance(repeats, bool) or repeats < 1):
        issues.append(ProfileIssue(f"{path}.repeats", f"must be a positive integer or \"infinite\", got {repeats!r}"))
        return None, None
    hold_after = raw.get("hold_after", False)
    if not isinstance(hold_after, bool):
        issues.append(ProfileIssue(f"{path}.hold_after", f"expected a boolean, got {hold_after!r}"))
        return None, None
    if on_ms is None or off_ms is None:
        return None, None
    return BlinkSchedule(on_ms=on_ms, off_ms=off_ms, repeats=repeats, hold_after=hold_after), None


def _parse_cue(raw: Any, path: str, issues: list[ProfileIssue]) -> Union[str, CueSpec, None]:
    if isinstance(raw, str):
        return raw
    if not isinstance(raw, dict):
        issues.append(ProfileIssue(path, f"expected a cue name or cue object, got {raw!r}"))
        return None
    allowed = {"name", "segments", "amplitude", "attack_ms", "release_ms"}
    if not _expect_keys(raw, allowed, {"name", "segments"}, path, issues):
        return None
    segments_raw = raw["segments"]
    if not isinstance(segments_raw, list) or not all(
        isinstance(s, list) and len(s) == 2 for s in segments_raw
    ):
        issues.append(ProfileIssue(f"{path}.segments", "expected a list of [freq_hz, dur_ms] pairs"))
        return None
    try:
        return CueSpec(
            name=raw["name"],
            segments=tuple((float(f), int(d)) for f, d in segments_raw),
            amplitude=float(raw.get("amplitude", 0.3)),
            attack_ms=int(raw.get("attack_ms", 10)),
            release_ms=int(raw.get("release_ms", 10)),
        )
    except (TypeError, ValueError) as exc:
        issues.append(ProfileIssue(path, str(exc)))
        return None


def _parse_episode(raw: Any, path: str, issues: list[ProfileIssue]) -> EpisodeStyle | None:
    if not isinstance(raw, dict):
        issues.append(ProfileIssue(path, f"expected an object, got {raw!r}"))
        return None
    fields = {"enabled", "shape", "color", "schedule", "cue"}
    if not _expect_keys(raw, fields, fields, path, issues):
        return None
    ok = True
    enabled = raw["enabled"]
    if not isinstance(enabled, bool):
        issues.append(ProfileIssue(f"{path}.enabled", f"expected a boolean, got {enabled!r}"))
        ok = False
    try:
        shape = ShapeKind(raw["shape"])
    except ValueError:
        issues.append(
            ProfileIssue(f"{path}.shape", f"unknown shape {raw['shape']!r}; one of {[s.value for s in ShapeKind]}")
        )
        ok = False
    color = _parse_color(raw["color"], f"{path}.color", issues)
    schedule, duration = _parse_schedule(raw["schedule"], f"{path}.schedule", issues)
    cue = _parse_cue(raw["cue"], f"{path}.cue", issues)
    if not ok or color is None or (schedule is None and duration is None) or cue is None:
        return None
    return EpisodeStyle(
        enabled=enabled, shape=shape, color=color, schedule=schedule, duration_ms=duration, cue=cue
    )


def load_profile(document: str) -> FeedbackProfile:
    """Parse and validate a profile document; raises ProfileError listing
    every violation (not just the first) with a path to the offending field."""
    issues: list[ProfileIssue] = []
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ProfileError([ProfileIssue("$", f"invalid JSON: {exc}")]) from None
    if not isinstance(raw, dict):
        raise ProfileError([ProfileIssue("$", "top level must be an object")])

    top = {"version", "geometry", "tick_hz", "reward_threshold", "episodes"}
    _expect_keys(raw, top, top, "", issues)
    if raw.get("version") != PROFILE_VERSION:
        issues.append(ProfileIssue("version", f"unsupported version {raw.get('version')!r}, expected {PROFILE_VERSION}"))

    geometry = None
    geo_raw = raw.get("geometry")
    if isinstance(geo_raw, dict):
        if _expect_keys(geo_raw, {"width", "height"}, {"width", "height"}, "geometry", issues):
            w = _parse_int(geo_raw, "width", "geometry", issues, minimum=1)
            h = _parse_int(geo_raw, "height", "geometry", issues, minimum=1)
            if w is not None and h is not None:
                geometry = GridGeometry(w, h)
    elif "geometry" in raw:
        issues.append(ProfileIssue("geometry", f"expected an object, got {geo_raw!r}"))

    tick_hz = _parse_int(raw, "tick_hz", "", issues, minimum=1) if "tick_hz" in raw else None
    threshold = _parse_int(raw, "reward_threshold", "", issues, minimum=1) if "reward_threshold" in raw else None

    episodes: dict[EpisodeKind, EpisodeStyle] = {}
    eps_raw = raw.get("episodes")
    if isinstance(eps_raw, dict):
        known = {k.value for k in CONFIGURABLE_KINDS}
        _expect_keys(eps_raw, known, known, "episodes", issues)
        for kind in CONFIGURABLE_KINDS:
            if kind.value in eps_raw:
                style = _parse_episode(eps_raw[kind.value], f"episodes.{kind.value}", issues)
                if style is not None:
                    episodes[kind] = style
    elif "episodes" in raw:
        issues.append(ProfileIssue("episodes", f"expected an object, got {eps_raw!r}"))

    issues.extend(_cross_issues(episodes))
    if issues or geometry is None or tick_hz is None or threshold is None or len(episodes) != len(CONFIGURABLE_KINDS):
        raise ProfileError(issues or [ProfileIssue("$", "incomplete profile")])
    return FeedbackProfile(
        geometry=geometry, tick_hz=tick_hz, reward_threshold=threshold, episodes=episodes
    )


def _cue_document(cue: Union[str, CueSpec]) -> Any:
    if isinstance(cue, str):
        return cue
    return {
        "name": cue.name,
        "segments": [[freq, dur] for freq, dur in cue.segments],
        "amplitude": cue.amplitude,
        "attack_ms": cue.attack_ms,
        "release_ms": cue.release_ms,
    }


def to_document(profile: FeedbackProfile) -> dict:
    episodes = {}
    for kind in CONFIGURABLE_KINDS:
        style = profile.episodes[kind]
        if style.duration_ms is not None:
            schedule: dict[str, Any] = {"duration_ms": style.duration_ms}
        else:
            assert style.schedule is not None
            schedule = {
                "on_ms": style.schedule.on_ms,
                "off_ms": style.schedule.off_ms,
                "repeats": style.schedule.repeats,
                "hold_after": style.schedule.hold_after,
            }
        episodes[kind.value] = {
            "enabled": style.enabled,
            "shape": style.shape.value,
            "color": [style.color.r, style.color.g, style.color.b],
            "schedule": schedule,
            "cue": _cue_document(style.cue),
        }
    return {
        "version": PROFILE_VERSION,
        "geometry": {"width": profile.geometry.width, "height": profile.geometry.height},
        "tick_hz": profile.tick_hz,
        "reward_threshold": profile.reward_threshold,
        "episodes": episodes,
    }


def save_profile(profile: FeedbackProfile) -> str:
    """Canonical serialization: sorted keys, 2-space indent, LF, trailing newline."""
    return json.dumps(to_document(profile), sort_keys=True, indent=2) + "\n"


def profile_hash(profile: FeedbackProfile) -> str:
    """Stable identity of a profile, used to gate trace replay."""
    return hashlib.sha256(save_profile(profile).encode("utf-8")).hexdigest()
