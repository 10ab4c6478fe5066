import dataclasses

import pytest

from amico.model import CobotEvent, EventName
from amico.profile import default_profile
from amico.sim import SimConfig, run_script
from amico.trace import (
    HeaderMismatchError,
    TraceFormatError,
    decode_header,
    encode_header,
    events_only_trace,
    header_for,
    read_trace,
    record,
    replay,
    run_lines,
    write_trace,
)
from amico.wire import CueMsg, EventMsg, FrameMsg, decode


def _events():
    return run_script(SimConfig(cycles=3, p_fault=0.0, p_misplace=0.0, seed=1))


def test_header_roundtrip():
    header = header_for(default_profile(), seed=42)
    assert decode_header(encode_header(header)) == header


def test_header_without_seed():
    header = header_for(default_profile())
    line = encode_header(header)
    assert "seed" not in line
    assert decode_header(line) == header


def test_header_rejects_unknown_fields():
    with pytest.raises(TraceFormatError):
        decode_header('{"v":1,"profile_hash":"x","geometry":"8x24","tick_hz":30,"foo":1}')


def test_record_then_replay_is_exact():
    profile = default_profile()
    lines = record(profile, _events(), seed=1)
    header = decode_header(lines[0])
    result = replay(profile, header, lines[1:])
    assert result.ok
    assert result.first_divergence_line is None


def test_tampered_frame_line_reports_position():
    profile = default_profile()
    lines = record(profile, _events(), seed=1)
    header = decode_header(lines[0])
    body = lines[1:]
    # corrupt the first frame line
    idx = next(i for i, ln in enumerate(body) if isinstance(decode(ln), FrameMsg))
    body[idx] = body[idx].replace('"t_ms":', '"t_ms":1', 1)
    result = replay(profile, header, body)
    assert not result.ok
    assert result.first_divergence_line == idx + 2  # 1-based, after the header


def test_replay_refuses_header_mismatch():
    profile = default_profile()
    lines = record(profile, _events(), seed=1)
    header = decode_header(lines[0])
    other = dataclasses.replace(profile, reward_threshold=11)
    with pytest.raises(HeaderMismatchError):
        replay(other, header, lines[1:])


def test_events_only_trace_replays_and_regenerates():
    profile = default_profile()
    events = _events()
    lines = events_only_trace(profile, events, seed=1)
    header = decode_header(lines[0])
    result = replay(profile, header, lines[1:])
    assert result.ok  # nothing recorded to diverge from
    assert any(isinstance(decode(ln), FrameMsg) for ln in result.regenerated)


def test_header_only_trace_produces_no_output():
    profile = default_profile()
    header = header_for(profile)
    result = replay(profile, header, [])
    assert result.ok
    assert result.regenerated == []


def test_run_lines_echoes_events_in_order():
    profile = default_profile()
    events = _events()
    lines = run_lines(profile, events)
    echoed = [decode(ln) for ln in lines if isinstance(decode(ln), EventMsg)]
    assert [(m.name, m.t_ms) for m in echoed] == [(e.name, e.t_ms) for e in events]


def test_run_lines_emits_cues_for_each_episode():
    profile = default_profile()
    lines = run_lines(profile, _events())
    cue_names = [decode(ln).name for ln in lines if isinstance(decode(ln), CueMsg)]
    # three cycles: suspense + confirmation each, no faults, no rewards
    assert cue_names == ["suspense", "confirmation"] * 3


def test_run_stops_after_shutdown():
    profile = default_profile()
    events = [
        CobotEvent(name=EventName.SEARCH_STARTED, t_ms=0),
        CobotEvent(name=EventName.SHUTDOWN, t_ms=100),
        CobotEvent(name=EventName.SEARCH_STARTED, t_ms=200),  # never processed
    ]
    lines = run_lines(profile, events)
    decoded = [decode(ln) for ln in lines]
    event_names = [m.name for m in decoded if isinstance(m, EventMsg)]
    assert EventName.SHUTDOWN in event_names
    assert event_names.count(EventName.SEARCH_STARTED) == 1
    last_frame = [m for m in decoded if isinstance(m, FrameMsg)][-1]
    assert last_frame.t_ms <= 133


def test_run_settles_on_latched_fault():
    # a trace ending in an uncleared fault holds the X forever; the offline
    # run must still terminate, right after the fault's tick
    profile = default_profile()
    events = [
        CobotEvent(name=EventName.SEARCH_STARTED, t_ms=0),
        CobotEvent(name=EventName.FAULT, t_ms=1000),
    ]
    lines = run_lines(profile, events)
    frames = [decode(ln) for ln in lines if isinstance(decode(ln), FrameMsg)]
    assert frames[-1].t_ms == 1000


def test_trace_file_roundtrip(tmp_path):
    profile = default_profile()
    lines = record(profile, _events(), seed=1)
    path = tmp_path / "run.trace"
    write_trace(path, lines)
    header, body = read_trace(path)
    assert header == decode_header(lines[0])
    assert body == lines[1:]
    assert replay(profile, header, body).ok


def test_trace_grows_about_thirty_lines_per_second():
    # 3 fault-free cycles cover 24 s of virtual time at 30 Hz
    profile = default_profile()
    events = _events()
    lines = run_lines(profile, events)
    frames = [decode(ln) for ln in lines if isinstance(decode(ln), FrameMsg)]
    span_s = frames[-1].t_ms / 1000
    assert span_s > 20
    assert abs(len(frames) / span_s - 30) < 1.0
    assert all(len(ln) <= 900 for ln in lines)
