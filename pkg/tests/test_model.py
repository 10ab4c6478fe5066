import pytest

from amico.model import (
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


def test_priority_table():
    assert priority_of(EpisodeKind.SYSTEM_ERROR) == 3
    assert priority_of(EpisodeKind.SEARCHING) == 2
    assert priority_of(EpisodeKind.CONFIRMATION) == 1
    assert priority_of(EpisodeKind.WORKFLOW_REWARD) == 1
    assert priority_of(EpisodeKind.IDLE) == 0


def test_priority_is_pure():
    for kind in EpisodeKind:
        assert priority_of(kind) == priority_of(kind)


def test_blank_frame_1x1():
    f = blank_frame(GridGeometry(1, 1), 0)
    assert f.pixels == (BLACK,)


def test_blank_frame_default_tower():
    f = blank_frame(GridGeometry(8, 24), 5)
    assert len(f.pixels) == 192
    assert all(px == BLACK for px in f.pixels)
    assert f.t_ms == 5


def test_blank_frame_3x2():
    assert len(blank_frame(GridGeometry(3, 2), 0).pixels) == 6


def test_frame_pixel_count_enforced():
    with pytest.raises(ValueError):
        Frame(geometry=GridGeometry(2, 2), pixels=(BLACK,) * 3, t_ms=0)


def test_color_channel_range():
    Color(0, 128, 255)
    with pytest.raises(ValueError):
        Color(-1, 0, 0)
    with pytest.raises(ValueError):
        Color(0, 256, 0)


def test_geometry_must_be_positive():
    with pytest.raises(ValueError):
        GridGeometry(0, 5)
    with pytest.raises(ValueError):
        GridGeometry(8, 0)


def test_geometry_parse_roundtrip():
    g = GridGeometry.parse("8x24")
    assert (g.width, g.height) == (8, 24)
    assert GridGeometry.parse(str(g)) == g
    with pytest.raises(ValueError):
        GridGeometry.parse("wide")


def test_event_names_roundtrip_text():
    for name in EventName:
        assert EventName(name.value) is name


def test_event_requires_nonnegative_time():
    CobotEvent(name=EventName.FAULT, t_ms=0)
    with pytest.raises(ValueError):
        CobotEvent(name=EventName.FAULT, t_ms=-1)


def test_frame_lit_set_and_accessor():
    g = GridGeometry(2, 2)
    red = Color(255, 0, 0)
    f = Frame(geometry=g, pixels=(BLACK, red, BLACK, BLACK), t_ms=0)
    assert f.lit_set() == {(1, 0)}
    assert f.pixel(1, 0) == red
    assert f.to_rgb_bytes() == bytes([0, 0, 0, 255, 0, 0, 0, 0, 0, 0, 0, 0])
