"""The feedback orchestrator: a prioritized state machine over cobot events.

``handle_event`` and ``tick`` are pure: they take a state value and return a
new one plus a list of effects, which makes every transition unit-testable
and every run replayable. A single owner (the offline runner or the live
server) applies events at tick boundaries in arrival order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Union

from .model import (
    CobotEvent,
    EpisodeKind,
    EventName,
    Frame,
    GridGeometry,
    blank_frame,
    priority_of,
)
from .patterns import episode_frame
from .profile import FeedbackProfile


class NonMonotonicEventError(ValueError):
    """An event arrived with a timestamp older than one already handled."""


class ClockRegressionError(ValueError):
    """tick() was called with a timestamp older than the previous tick."""


@dataclass(frozen=True)
class StartEpisode:
    kind: EpisodeKind


@dataclass(frozen=True)
class PlayCue:
    name: str


@dataclass(frozen=True)
class StopEpisode:
    kind: EpisodeKind


@dataclass(frozen=True)
class EmitLog:
    text: str


Effect = Union[StartEpisode, PlayCue, StopEpisode, EmitLog]


@dataclass(frozen=True)
class EngineState:
    """Complete orchestrator state; geometry lives on the profile."""

    profile: FeedbackProfile
    active_kind: EpisodeKind = EpisodeKind.IDLE
    active_start_ms: int = 0
    pending_reward: int = 0
    assembly_counter: int = 0
    fault_latched: bool = False
    last_event_ms: int = -1
    last_tick_ms: int = -1

    @property
    def geometry(self) -> GridGeometry:
        return self.profile.geometry

    @property
    def idle(self) -> bool:
        return self.active_kind is EpisodeKind.IDLE


def initial_state(profile: FeedbackProfile) -> EngineState:
    return EngineState(profile=profile)


def reset(state: EngineState) -> EngineState:
    """Back to idle with zeroed counters; profile, geometry and clocks are kept."""
    return dataclasses.replace(
        state,
        active_kind=EpisodeKind.IDLE,
        active_start_ms=0,
        pending_reward=0,
        assembly_counter=0,
        fault_latched=False,
    )


def _start(
    state: EngineState, kind: EpisodeKind, t_ms: int, effects: list[Effect]
) -> EngineState:
    style = state.profile.episodes[kind]
    effects.append(StartEpisode(kind))
    cue = style.cue_name()
    if cue:
        effects.append(PlayCue(cue))
    effects.append(EmitLog(f"episode {kind.value} started at t={t_ms}"))
    return dataclasses.replace(state, active_kind=kind, active_start_ms=t_ms)


def _note_truncated_reward(state: EngineState, effects: list[Effect]) -> None:
    # A reward interrupted mid-play counts as delivered: its cue already
    # sounded, and replaying it would mark the same milestone twice.
    if state.active_kind is EpisodeKind.WORKFLOW_REWARD:
        effects.append(EmitLog("workflow reward display truncated by preemption"))


def handle_event(state: EngineState, event: CobotEvent) -> tuple[EngineState, list[Effect]]:
    """Apply one cobot event. Preemption follows the priority table strictly;
    equal-priority episodes never preempt, they queue (rewards) or drop."""
    if event.t_ms < state.last_event_ms:
        raise NonMonotonicEventError(
            f"event {event.name.value} at t={event.t_ms} after one at t={state.last_event_ms}"
        )
    state = dataclasses.replace(state, last_event_ms=event.t_ms)
    effects: list[Effect] = []
    name = event.name

    if name is EventName.FAULT:
        if state.active_kind is EpisodeKind.SYSTEM_ERROR:
            effects.append(EmitLog("fault repeated while latched; ignored"))
            return state, effects
        if not state.profile.episodes[EpisodeKind.SYSTEM_ERROR].enabled:
            effects.append(EmitLog("system_error episode disabled; fault not displayed"))
            return dataclasses.replace(state, fault_latched=True), effects
        _note_truncated_reward(state, effects)
        state = _start(state, EpisodeKind.SYSTEM_ERROR, event.t_ms, effects)
        return dataclasses.replace(state, fault_latched=True), effects

    if name is EventName.FAULT_CLEARED:
        if not state.fault_latched:
            effects.append(EmitLog("fault_cleared with no latched fault; ignored"))
            return state, effects
        if state.active_kind is EpisodeKind.SYSTEM_ERROR:
            effects.append(StopEpisode(EpisodeKind.SYSTEM_ERROR))
        effects.append(EmitLog(f"fault cleared at t={event.t_ms}"))
        return (
            dataclasses.replace(
                state, fault_latched=False, active_kind=EpisodeKind.IDLE, active_start_ms=event.t_ms
            ),
            effects,
        )

    if name is EventName.SEARCH_STARTED:
        if not state.profile.episodes[EpisodeKind.SEARCHING].enabled:
            effects.append(EmitLog("searching episode disabled; event ignored"))
            return state, effects
        if priority_of(state.active_kind) >= priority_of(EpisodeKind.SEARCHING):
            effects.append(
                EmitLog(f"search_started ignored; {state.active_kind.value} has priority")
            )
            return state, effects
        _note_truncated_reward(state, effects)
        return _start(state, EpisodeKind.SEARCHING, event.t_ms, effects), effects

    if name is EventName.PIECE_DETECTED:
        if not state.profile.episodes[EpisodeKind.CONFIRMATION].enabled:
            effects.append(EmitLog("confirmation episode disabled; event ignored"))
            return state, effects
        if priority_of(state.active_kind) > priority_of(EpisodeKind.SEARCHING):
            effects.append(EmitLog("piece_detected ignored during fault"))
            return state, effects
        if state.active_kind in (EpisodeKind.CONFIRMATION, EpisodeKind.WORKFLOW_REWARD):
            # equal priority never preempts
            effects.append(
                EmitLog(f"piece_detected dropped; {state.active_kind.value} still playing")
            )
            return state, effects
        if state.active_kind is EpisodeKind.SEARCHING:
            effects.append(StopEpisode(EpisodeKind.SEARCHING))
        return _start(state, EpisodeKind.CONFIRMATION, event.t_ms, effects), effects

    if name is EventName.ASSEMBLY_COMPLETED:
        counter = state.assembly_counter + 1
        pending = state.pending_reward
        if counter % state.profile.reward_threshold == 0:
            pending += 1
            effects.append(EmitLog(f"assembly {counter}: workflow reward earned"))
        return (
            dataclasses.replace(state, assembly_counter=counter, pending_reward=pending),
            effects,
        )

    if name is EventName.RUNNING:
        effects.append(EmitLog("cobot running"))
        return state, effects

    if name is EventName.SHUTDOWN:
        if not state.idle:
            effects.append(StopEpisode(state.active_kind))
        effects.append(EmitLog("shutdown received"))
        return (
            dataclasses.replace(
                state,
                active_kind=EpisodeKind.IDLE,
                active_start_ms=event.t_ms,
                fault_latched=False,
            ),
            effects,
        )

    raise AssertionError(f"unhandled event {name}")  # unreachable: enum is closed


def tick(state: EngineState, now_ms: int) -> tuple[EngineState, Frame, list[Effect]]:
    """Advance time: finish elapsed episodes, dequeue a pending reward when
    idle, and render the frame for ``now_ms``."""
    if now_ms < state.last_tick_ms:
        raise ClockRegressionError(f"tick at t={now_ms} after t={state.last_tick_ms}")
    state = dataclasses.replace(state, last_tick_ms=now_ms)
    effects: list[Effect] = []

    if not state.idle and not (state.active_kind is EpisodeKind.SYSTEM_ERROR and state.fault_latched):
        span = state.profile.episodes[state.active_kind].finite_span_ms()
        if span is not None and now_ms - state.active_start_ms >= span:
            effects.append(StopEpisode(state.active_kind))
            effects.append(EmitLog(f"episode {state.active_kind.value} finished at t={now_ms}"))
            state = dataclasses.replace(
                state, active_kind=EpisodeKind.IDLE, active_start_ms=now_ms
            )

    if state.idle and state.pending_reward > 0:
        state = dataclasses.replace(state, pending_reward=state.pending_reward - 1)
        if state.profile.episodes[EpisodeKind.WORKFLOW_REWARD].enabled:
            state = _start(state, EpisodeKind.WORKFLOW_REWARD, now_ms, effects)
        else:
            effects.append(EmitLog("workflow reward discarded; episode disabled"))

    if state.idle:
        frame = blank_frame(state.geometry, now_ms)
    else:
        frame = episode_frame(
            state.active_kind, state.profile, state.geometry, now_ms - state.active_start_ms
        )
        frame = dataclasses.replace(frame, t_ms=now_ms)
    return state, frame, effects


def tick_time_ms(tick_index: int, tick_hz: int) -> int:
    """Integer-millisecond tick schedule: floor(k * 1000 / hz)."""
    return tick_index * 1000 // tick_hz
