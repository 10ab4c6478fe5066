"""Cue specifications and offline PCM synthesis.

The engine only puts cue *names* on the wire; sinks synthesize locally.
This module renders the same cues to 16-bit mono PCM for desk verification
and WAV export.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

DEFAULT_SAMPLE_RATE = 44100
PEAK = 32767.0


@dataclass(frozen=True)
class CueSpec:
    """A short tone sequence: (freq_hz, dur_ms) segments, freq 0 meaning silence.

    A linear attack/release envelope is applied to every voiced segment so
    cues start and end without clicks.
    """

    name: str
    segments: tuple[tuple[float, int], ...]
    amplitude: float = 0.3
    attack_ms: int = 10
    release_ms: int = 10

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("cue needs at least one segment")
        for freq, dur in self.segments:
            if freq < 0:
                raise ValueError(f"segment frequency must be >= 0, got {freq}")
            if dur < 1:
                raise ValueError(f"segment duration must be >= 1 ms, got {dur}")
        if not 0.0 < self.amplitude <= 1.0:
            raise ValueError(f"amplitude must be in (0, 1], got {self.amplitude}")
        if self.attack_ms < 0 or self.release_ms < 0:
            raise ValueError("attack_ms and release_ms must be >= 0")
        voiced = [dur for freq, dur in self.segments if freq > 0]
        if voiced and self.attack_ms + self.release_ms > min(voiced):
            raise ValueError(
                f"attack {self.attack_ms} + release {self.release_ms} ms exceeds "
                f"shortest voiced segment ({min(voiced)} ms)"
            )

    @property
    def total_dur_ms(self) -> int:
        return sum(dur for _, dur in self.segments)


@dataclass(frozen=True, eq=False)
class PcmBuffer:
    """Rendered mono audio: signed 16-bit samples at ``sample_rate_hz``."""

    sample_rate_hz: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.sample_rate_hz < 1:
            raise ValueError("sample rate must be positive")
        if self.samples.dtype != np.int16:
            raise ValueError(f"samples must be int16, got {self.samples.dtype}")
        self.samples.setflags(write=False)

    def __len__(self) -> int:
        return len(self.samples)


def default_cues() -> dict[str, CueSpec]:
    """The four built-in cues, keyed by name.

    Contours carry the intent: descending = alert, repetition = suspense,
    ascending = confirmation, rising arpeggio = reward. Amplitude is kept low
    for an unobtrusive factory-floor presence.
    """
    return {
        "error": CueSpec(name="error", segments=((660.0, 150), (440.0, 250))),
        "suspense": CueSpec(name="suspense", segments=((392.0, 150), (0.0, 80), (392.0, 150))),
        "confirmation": CueSpec(name="confirmation", segments=((523.0, 120), (784.0, 120))),
        "victory": CueSpec(
            name="victory",
            segments=((523.0, 120), (659.0, 120), (784.0, 120), (1047.0, 120)),
        ),
    }


def _ms_to_samples(sample_rate_hz: int, t_ms: int) -> int:
    # round half away from zero, in exact integer arithmetic
    return (sample_rate_hz * t_ms + 500) // 1000


def synthesize(spec: CueSpec, sample_rate_hz: int = DEFAULT_SAMPLE_RATE) -> PcmBuffer:
    """Render a cue to PCM.

    Segment boundaries are placed at the rounded *cumulative* duration, so the
    buffer length is exactly round(sample_rate * total_dur_ms / 1000) whatever
    the per-segment durations are. Sample n of a voiced segment at local time
    t = n/sr is round(32767 * amplitude * env(t) * sin(2*pi*f*t)) with env
    rising linearly over the attack and falling over the release.
    """
    if sample_rate_hz < 1:
        raise ValueError("sample rate must be positive")
    total = _ms_to_samples(sample_rate_hz, spec.total_dur_ms)
    out = np.zeros(total, dtype=np.float64)
    cum_ms = 0
    start = 0
    for freq, dur_ms in spec.segments:
        cum_ms += dur_ms
        end = _ms_to_samples(sample_rate_hz, cum_ms)
        n = end - start
        if n > 0 and freq > 0:
            t = np.arange(n, dtype=np.float64) / sample_rate_hz
            env = np.ones(n, dtype=np.float64)
            if spec.attack_ms > 0:
                env = np.minimum(env, t / (spec.attack_ms / 1000.0))
            if spec.release_ms > 0:
                env = np.minimum(env, (dur_ms / 1000.0 - t) / (spec.release_ms / 1000.0))
            env = np.clip(env, 0.0, 1.0)
            out[start:end] = PEAK * spec.amplitude * env * np.sin(2.0 * np.pi * freq * t)
        start = end
    samples = np.where(out >= 0, np.floor(out + 0.5), np.ceil(out - 0.5)).astype(np.int16)
    return PcmBuffer(sample_rate_hz=sample_rate_hz, samples=samples)


def write_wav(buffer: PcmBuffer, destination: Union[str, Path, BinaryIO]) -> None:
    """Write a PcmBuffer as RIFF/WAVE: PCM format 1, mono, 16-bit little-endian."""
    if len(buffer) == 0:
        raise ValueError("refusing to write an empty buffer")
    data = buffer.samples.astype("<i2").tobytes()
    header = b"RIFF"
    header += struct.pack("<I", 36 + len(data))
    header += b"WAVE"
    header += b"fmt "
    byte_rate = buffer.sample_rate_hz * 2
    header += struct.pack("<IHHIIHH", 16, 1, 1, buffer.sample_rate_hz, byte_rate, 2, 16)
    header += b"data"
    header += struct.pack("<I", len(data))
    if isinstance(destination, (str, Path)):
        with open(destination, "wb") as fh:
            fh.write(header)
            fh.write(data)
    else:
        destination.write(header)
        destination.write(data)
