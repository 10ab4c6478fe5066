import json
import subprocess
import sys

from amico.cli import main
from amico.profile import default_profile, save_profile, to_document


def test_simulate_writes_deterministic_trace(tmp_path):
    a = tmp_path / "a.trace"
    b = tmp_path / "b.trace"
    flags = ["simulate", "--seed", "1", "--cycles", "10", "--p-fault", "0"]
    assert main(flags + ["--out", str(a)]) == 0
    assert main(flags + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().count('"assembly_completed"') == 10


def test_simulate_rejects_bad_probability(tmp_path):
    code = main(["simulate", "--p-fault", "1.5", "--out", str(tmp_path / "x.trace")])
    assert code == 2


def test_replay_of_events_trace_then_full_trace(tmp_path, capsys):
    events = tmp_path / "events.trace"
    full = tmp_path / "full.trace"
    assert main(["simulate", "--seed", "3", "--cycles", "3", "--out", str(events)]) == 0
    assert main(["replay", "--trace", str(events), "--out", str(full)]) == 0
    assert full.exists()
    # the full trace now verifies against itself
    assert main(["replay", "--trace", str(full)]) == 0


def test_replay_detects_tampering(tmp_path, capsys):
    events = tmp_path / "events.trace"
    full = tmp_path / "full.trace"
    main(["simulate", "--seed", "3", "--cycles", "2", "--out", str(events)])
    main(["replay", "--trace", str(events), "--out", str(full)])
    lines = full.read_text().splitlines(keepends=True)
    victim = next(i for i, ln in enumerate(lines) if '"type":"frame"' in ln)
    lines[victim] = lines[victim].replace('"v":1', '"v":1', 1).replace('"t_ms":', '"t_ms":9', 1)
    full.write_text("".join(lines))
    code = main(["replay", "--trace", str(full)])
    assert code == 1
    err = capsys.readouterr().err
    assert f"line {victim + 1}" in err


def test_replay_refuses_wrong_profile(tmp_path, capsys):
    events = tmp_path / "events.trace"
    main(["simulate", "--seed", "3", "--cycles", "2", "--out", str(events)])
    other = tmp_path / "other.json"
    doc = to_document(default_profile())
    doc["reward_threshold"] = 5
    other.write_text(json.dumps(doc))
    code = main(["replay", "--trace", str(events), "--profile", str(other)])
    assert code == 2
    assert "does not match" in capsys.readouterr().err


def test_replay_ascii_renders_frames(tmp_path, capsys):
    events = tmp_path / "events.trace"
    main(["simulate", "--seed", "3", "--cycles", "1", "--p-fault", "0", "--out", str(events)])
    assert main(["replay", "--trace", str(events), "--render", "ascii"]) == 0
    out = capsys.readouterr().out
    assert "█" * 8 in out  # confirmation fills an 8-wide row


def test_validate_profile_accepts_defaults(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(save_profile(default_profile()))
    assert main(["validate-profile", str(path)]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_profile_lists_all_problems(tmp_path, capsys):
    doc = to_document(default_profile())
    doc["reward_threshold"] = 0
    doc["episodes"]["searching"]["shape"] = "x_cross"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["validate-profile", str(path)]) == 2
    err = capsys.readouterr().err
    assert "reward_threshold" in err
    assert "searching" in err


def test_validate_profile_missing_file(tmp_path):
    assert main(["validate-profile", str(tmp_path / "nope.json")]) == 3


def test_missing_profile_path_names_it(tmp_path, capsys):
    code = main(["render", "--episode", "idle", "--profile", str(tmp_path / "ghost.json")])
    assert code == 2
    assert "ghost.json" in capsys.readouterr().err


def test_render_system_error(capsys):
    assert main(["render", "--episode", "system_error", "--elapsed", "100"]) == 0
    out = capsys.readouterr().out
    assert out.count("█") == 16


def test_render_rejects_unknown_episode(capsys):
    assert main(["render", "--episode", "disco"]) == 2


def test_render_rejects_zero_geometry(capsys):
    assert main(["render", "--episode", "idle", "--geometry", "0x5"]) == 2


def test_export_audio_writes_four_wavs(tmp_path):
    out = tmp_path / "cues"
    assert main(["export-audio", "--out-dir", str(out)]) == 0
    names = sorted(p.name for p in out.glob("*.wav"))
    assert names == ["confirmation.wav", "error.wav", "suspense.wav", "victory.wav"]
    blob = (out / "error.wav").read_bytes()
    assert blob[:4] == b"RIFF"


def test_profile_env_var_is_honored(tmp_path, monkeypatch, capsys):
    import dataclasses

    from amico.model import GridGeometry

    profile = dataclasses.replace(default_profile(), geometry=GridGeometry(3, 3))
    path = tmp_path / "env.json"
    path.write_text(save_profile(profile))
    monkeypatch.setenv("AMICO_PROFILE", str(path))
    assert main(["render", "--episode", "confirmation"]) == 0
    out = capsys.readouterr().out
    assert "█" * 3 + "\n" in out
    assert "█" * 8 not in out


def test_stdio_run_emits_frames_and_exits():
    events = (
        '{"name":"piece_detected","t_ms":0,"type":"event","v":1}\n'
        '{"name":"assembly_completed","t_ms":100,"type":"event","v":1}\n'
    )
    proc = subprocess.run(
        [sys.executable, "-m", "amico.cli", "run", "--stdio", "--tick", "100"],
        input=events,
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 0
    lines = proc.stdout.strip().splitlines()
    assert any('"type":"frame"' in ln for ln in lines)
    assert any('"type":"cue"' in ln and '"confirmation"' in ln for ln in lines)


def test_run_exits_2_on_invalid_geometry(capsys):
    assert main(["run", "--geometry", "8x0"]) == 2


def test_stdio_shutdown_event_stops_run():
    events = '{"name":"shutdown","t_ms":0,"type":"event","v":1}\n'
    proc = subprocess.run(
        [sys.executable, "-m", "amico.cli", "run", "--stdio", "--tick", "100"],
        input=events,
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 0


def test_ascii_replay_survives_closed_pipe(tmp_path):
    events = tmp_path / "events.trace"
    main(["simulate", "--seed", "3", "--cycles", "2", "--p-fault", "0", "--out", str(events)])
    proc = subprocess.run(
        f"{sys.executable} -m amico.cli replay --trace {events} --render ascii | head -3",
        shell=True,
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0  # head's status; the writer must not blow up
    assert "Traceback" not in proc.stderr
    assert len(proc.stdout.splitlines()) == 3


def test_run_exits_3_on_bind_failure(capsys):
    import socket

    blocker = socket.socket()
    blocker.bind(("127.0.0.1", 0))
    blocker.listen(1)
    port = blocker.getsockname()[1]
    try:
        assert main(["run", "--listen", f"127.0.0.1:{port}"]) == 3
        assert "cannot bind" in capsys.readouterr().err
    finally:
        blocker.close()


def test_simulate_attach_unreachable_engine(tmp_path):
    code = main(
        ["simulate", "--cycles", "1", "--attach", "127.0.0.1:1", "--speed", "1000"]
    )
    assert code == 3
