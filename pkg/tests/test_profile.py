import dataclasses
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amico.audio import CueSpec
from amico.model import Color, EpisodeKind, GridGeometry
from amico.patterns import BlinkSchedule, ShapeKind, episode_frame
from amico.profile import (
    CONFIGURABLE_KINDS,
    FeedbackProfile,
    ProfileError,
    default_profile,
    load_profile,
    profile_hash,
    save_profile,
    to_document,
    validate,
)


def test_default_threshold_and_geometry():
    p = default_profile()
    assert p.reward_threshold == 10
    assert (p.geometry.width, p.geometry.height) == (8, 24)
    assert p.tick_hz == 30


def test_default_colors():
    p = default_profile()
    assert p.episodes[EpisodeKind.SYSTEM_ERROR].color == Color(255, 0, 0)
    assert p.episodes[EpisodeKind.SEARCHING].color == Color(255, 100, 0)
    assert p.episodes[EpisodeKind.CONFIRMATION].color == Color(0, 255, 0)


def test_default_profile_validates_clean():
    assert validate(default_profile()) == []


def test_roundtrip_identity():
    p = default_profile()
    assert load_profile(save_profile(p)) == p


def test_save_is_canonical_fixpoint():
    p = default_profile()
    text = save_profile(p)
    assert text.startswith("{")
    assert text.endswith("\n")
    assert "\r" not in text
    assert save_profile(load_profile(text)) == text
    assert save_profile(p) == save_profile(default_profile())


def test_hash_tracks_content():
    p = default_profile()
    q = dataclasses.replace(p, reward_threshold=5)
    assert profile_hash(p) == profile_hash(default_profile())
    assert profile_hash(p) != profile_hash(q)


def _mutate(doc_mutator):
    doc = to_document(default_profile())
    doc_mutator(doc)
    with pytest.raises(ProfileError) as err:
        load_profile(json.dumps(doc))
    return err.value.issues


def test_zero_threshold_reports_path():
    issues = _mutate(lambda d: d.update(reward_threshold=0))
    assert any(i.path == "reward_threshold" for i in issues)


def test_bad_channel_reports_path():
    issues = _mutate(lambda d: d["episodes"]["system_error"].update(color=[256, 0, 0]))
    assert any(i.path.startswith("episodes.system_error.color") for i in issues)


def test_duplicate_shapes_name_both_episodes():
    issues = _mutate(lambda d: d["episodes"]["searching"].update(shape="x_cross"))
    text = " ".join(str(i) for i in issues)
    assert "system_error" in text and "searching" in text


def test_unknown_field_rejected():
    issues = _mutate(lambda d: d.update(brightness=5))
    assert any("brightness" in i.path for i in issues)


def test_unknown_episode_field_rejected():
    issues = _mutate(lambda d: d["episodes"]["searching"].update(speed=2))
    assert any(i.path == "episodes.searching.speed" for i in issues)


def test_unknown_cue_name_rejected():
    issues = _mutate(lambda d: d["episodes"]["searching"].update(cue="klaxon"))
    assert any(i.path == "episodes.searching.cue" for i in issues)


def test_all_violations_reported_not_just_first():
    def wreck(d):
        d["reward_threshold"] = 0
        d["tick_hz"] = 0
        d["episodes"]["system_error"]["color"] = [300, 0, 0]

    issues = _mutate(wreck)
    assert len(issues) >= 3


def test_missing_episode_entry_rejected():
    issues = _mutate(lambda d: d["episodes"].pop("confirmation"))
    assert any("confirmation" in i.path for i in issues)


def test_bad_json_reports_syntax():
    with pytest.raises(ProfileError) as err:
        load_profile("{nope")
    assert "JSON" in str(err.value)


def test_wrong_version_rejected():
    issues = _mutate(lambda d: d.update(version=2))
    assert any(i.path == "version" for i in issues)


def test_inline_cue_roundtrip():
    p = default_profile()
    custom = CueSpec(name="two_tone", segments=((500.0, 100), (700.0, 120)), amplitude=0.25)
    episodes = dict(p.episodes)
    episodes[EpisodeKind.CONFIRMATION] = dataclasses.replace(
        episodes[EpisodeKind.CONFIRMATION], cue=custom
    )
    p = dataclasses.replace(p, episodes=episodes)
    again = load_profile(save_profile(p))
    assert again == p
    assert again.cue_spec(EpisodeKind.CONFIRMATION) == custom


def test_schedule_defaults_fill_in():
    doc = to_document(default_profile())
    doc["episodes"]["confirmation"]["schedule"] = {"on_ms": 600}
    p = load_profile(json.dumps(doc))
    sched = p.episodes[EpisodeKind.CONFIRMATION].schedule
    assert sched == BlinkSchedule(on_ms=600, off_ms=0, repeats="infinite", hold_after=False)


def test_color_change_never_moves_pixels():
    p = default_profile()
    episodes = dict(p.episodes)
    for kind in (EpisodeKind.SYSTEM_ERROR, EpisodeKind.SEARCHING, EpisodeKind.CONFIRMATION):
        episodes[kind] = dataclasses.replace(episodes[kind], color=Color(1, 2, 3))
    recolored = dataclasses.replace(p, episodes=episodes)
    for kind in (EpisodeKind.SYSTEM_ERROR, EpisodeKind.SEARCHING, EpisodeKind.CONFIRMATION):
        for t in (0, 150, 450):
            a = episode_frame(kind, p, p.geometry, t).lit_set()
            b = episode_frame(kind, recolored, recolored.geometry, t).lit_set()
            assert a == b


def test_episode_style_needs_exactly_one_timing():
    from amico.profile import EpisodeStyle

    with pytest.raises(ValueError):
        EpisodeStyle(enabled=True, shape=ShapeKind.FULL_FILL, color=Color(0, 255, 0), cue="c")
    with pytest.raises(ValueError):
        EpisodeStyle(
            enabled=True,
            shape=ShapeKind.FULL_FILL,
            color=Color(0, 255, 0),
            schedule=BlinkSchedule(on_ms=100),
            duration_ms=500,
            cue="c",
        )


# --- randomized round-trip -------------------------------------------------

_colors = st.tuples(
    st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)
).map(lambda t: Color(*t))

_schedules = st.one_of(
    st.builds(
        BlinkSchedule,
        on_ms=st.integers(1, 2000),
        off_ms=st.integers(0, 2000),
        repeats=st.one_of(st.just("infinite"), st.integers(1, 9)),
        hold_after=st.booleans(),
    )
)

_shapes = st.permutations(
    [ShapeKind.X_CROSS, ShapeKind.DOWN_CHEVRONS, ShapeKind.FULL_FILL, ShapeKind.RAINBOW_SCROLL]
)

_cue_names = st.sampled_from(["error", "suspense", "confirmation", "victory"])


@st.composite
def profiles(draw):
    shapes = draw(_shapes)
    episodes = {}
    for kind, shape in zip(CONFIGURABLE_KINDS, shapes):
        timed = shape is ShapeKind.RAINBOW_SCROLL or draw(st.booleans())
        kwargs = dict(
            enabled=draw(st.booleans()),
            shape=shape,
            color=draw(_colors),
            cue=draw(_cue_names),
        )
        if timed:
            kwargs["duration_ms"] = draw(st.integers(1, 10_000))
        else:
            kwargs["schedule"] = draw(_schedules)
        from amico.profile import EpisodeStyle

        episodes[kind] = EpisodeStyle(**kwargs)
    return FeedbackProfile(
        geometry=GridGeometry(draw(st.integers(1, 64)), draw(st.integers(1, 64))),
        tick_hz=draw(st.integers(1, 240)),
        reward_threshold=draw(st.integers(1, 100)),
        episodes=episodes,
    )


@given(profiles())
@settings(max_examples=100, deadline=None)
def test_load_save_identity_on_random_profiles(profile):
    assert load_profile(save_profile(profile)) == profile
    assert save_profile(load_profile(save_profile(profile))) == save_profile(profile)
