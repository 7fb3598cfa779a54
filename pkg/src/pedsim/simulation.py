"""Fixed-timestep pedestrian and camera simulation.

Pedestrians walk in straight lines towards their active goal at constant
speed. When within :data:`ARRIVAL_RADIUS` of the goal, the controller picks the
next one and the pedestrian holds position for that tick.

Every random-mode pedestrian owns a counter-based (Philox) stream keyed by the
scenario seed and its name, so editing one pedestrian never perturbs the goal
sequence of another.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Pose, look_at_quaternion, quat_from_euler, quat_to_matrix
from .scenario import (
    CustomizedTargets,
    DroneWaypoints,
    EgocentricMount,
    Mount,
    PedestrianSpec,
    RandomTargets,
    Scenario,
    StaticMount,
)

ARRIVAL_RADIUS = 0.25


def entity_rng(seed: int, *names) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, *names)``."""
    h = hashlib.blake2b(digest_size=16)
    h.update(int(seed).to_bytes(8, "little", signed=True))
    for n in names:
        h.update(b"\x00" + str(n).encode("utf-8"))
    key = np.frombuffer(h.digest(), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class PedestrianState:
    """Snapshot of one pedestrian.

    ``goal`` is the controller cursor: the target id for random mode, an index
    into the owned-goal list for customized mode, or a path vertex index for
    path mode. ``direction`` (+1/-1) is used by ``reverse`` end behaviors.
    """

    name: str
    position: tuple[float, float, float]
    heading: float
    goal: str | int
    direction: int = 1
    terminal: bool = False
    goals_reached: int = 0


@dataclass(frozen=True)
class Tick:
    index: int
    timestamp: float
    pedestrians: tuple[PedestrianState, ...]
    cameras: dict  # camera id -> Pose

    def pedestrian(self, name: str) -> PedestrianState:
        for p in self.pedestrians:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass(frozen=True)
class SimTrace:
    scenario: str
    fps: float
    ticks: tuple[Tick, ...]

    def __len__(self):
        return len(self.ticks)

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "scenario": self.scenario,
            "fps": self.fps,
            "ticks": [
                {
                    "tick": t.index,
                    "timestamp_s": t.timestamp,
                    "pedestrians": [
                        {
                            "name": p.name,
                            "position": list(p.position),
                            "heading": p.heading,
                            "goal": p.goal,
                            "terminal": p.terminal,
                        }
                        for p in t.pedestrians
                    ],
                    "cameras": {cid: pose.to_dict() for cid, pose in t.cameras.items()},
                }
                for t in self.ticks
            ],
        }


# -- controllers -------------------------------------------------------------------


def _goal_position(state: PedestrianState, spec: PedestrianSpec, scenario: Scenario):
    c = spec.controller
    if isinstance(c, RandomTargets):
        return next(t.position for t in scenario.target_points if t.id == state.goal)
    if isinstance(c, CustomizedTargets):
        return scenario.owned_goals(spec.name)[state.goal].position
    return scenario.path(c.path_id).vertices[state.goal]


def pick_random_goal(scenario: Scenario, area: str, rng: np.random.Generator, exclude: str | None = None) -> str:
    """Uniform choice among the area's goals, never returning ``exclude``."""
    candidates = [t.id for t in scenario.area_goals(area) if t.id != exclude]
    return candidates[int(rng.integers(len(candidates)))]


def _advance_sequence(index: int, direction: int, n: int, end_behavior: str):
    """Next cursor in a list of ``n`` goals. Returns ``(index, direction, terminal)``."""
    nxt = index + direction
    if 0 <= nxt < n:
        return nxt, direction, False
    if end_behavior == "loop":
        return nxt % n, direction, False
    if end_behavior == "reverse" and n > 1:
        return index - direction, -direction, False
    return index, direction, True


def _next_goal(state: PedestrianState, spec: PedestrianSpec, scenario: Scenario, rng) -> PedestrianState:
    c = spec.controller
    if isinstance(c, RandomTargets):
        goal, direction, terminal = pick_random_goal(scenario, c.area, rng, exclude=state.goal), 1, False
    elif isinstance(c, CustomizedTargets):
        n = len(scenario.owned_goals(spec.name))
        goal, direction, terminal = _advance_sequence(state.goal, state.direction, n, c.end_behavior)
    else:
        path = scenario.path(c.path_id)
        end = c.end_behavior or path.end_behavior
        goal, direction, terminal = _advance_sequence(state.goal, state.direction, len(path.vertices), end)
    return replace(
        state, goal=goal, direction=direction, terminal=terminal, goals_reached=state.goals_reached + 1
    )


def initial_state(spec: PedestrianSpec, scenario: Scenario, rng: np.random.Generator | None = None) -> PedestrianState:
    c = spec.controller
    if isinstance(c, RandomTargets):
        if rng is None:
            rng = entity_rng(scenario.seed, "pedestrian", spec.name)
        goal = pick_random_goal(scenario, c.area, rng)
    else:
        goal = 0
    state = PedestrianState(spec.name, spec.spawn, 0.0, goal)
    return replace(state, heading=_heading_towards(state.position, _goal_position(state, spec, scenario), 0.0))


def _heading_towards(src, dst, fallback: float) -> float:
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    if dx == 0.0 and dy == 0.0:
        return fallback
    return math.atan2(dy, dx)


def step_pedestrian(
    state: PedestrianState, spec: PedestrianSpec, scenario: Scenario, dt: float, rng: np.random.Generator | None
) -> PedestrianState:
    """Advance one pedestrian by ``dt`` seconds."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if state.terminal:
        return state
    goal = _goal_position(state, spec, scenario)
    pos = np.asarray(state.position)
    delta = np.asarray(goal) - pos
    dist = float(np.linalg.norm(delta))
    if dist <= ARRIVAL_RADIUS:
        state = _next_goal(state, spec, scenario, rng)
        if state.terminal:
            return state
        new_goal = _goal_position(state, spec, scenario)
        return replace(state, heading=_heading_towards(state.position, new_goal, state.heading))
    step = min(spec.speed * dt, dist)
    new_pos = pos + delta * (step / dist)
    return replace(
        state,
        position=(float(new_pos[0]), float(new_pos[1]), float(new_pos[2])),
        heading=_heading_towards(state.position, goal, state.heading),
    )


# -- cameras -------------------------------------------------------------------------


def drone_position(mount: DroneWaypoints, t: float) -> tuple[np.ndarray, int]:
    """Position after ``t`` seconds of constant-speed flight, and the active segment index."""
    wps = np.asarray(mount.waypoints, dtype=float)
    seg_len = np.linalg.norm(np.diff(wps, axis=0), axis=1)
    s = mount.speed * max(t, 0.0)
    for i, length in enumerate(seg_len):
        if s <= length and length > 0:
            return wps[i] + (wps[i + 1] - wps[i]) * (s / length), i
        s -= length
    return wps[-1].copy(), len(seg_len) - 1


def step_camera(mount: Mount, t: float, pedestrians: dict[str, PedestrianState] | None = None) -> Pose:
    """Camera pose at time ``t``; egocentric mounts read the current pedestrian states."""
    if isinstance(mount, StaticMount):
        return mount.pose
    if isinstance(mount, DroneWaypoints):
        pos, seg = drone_position(mount, t)
        if mount.look_at is not None:
            q = look_at_quaternion(pos, mount.look_at)
        else:
            a, b = mount.waypoints[seg], mount.waypoints[seg + 1]
            q = quat_from_euler(_heading_towards(a, b, 0.0), mount.pitch_rad)
        return Pose(tuple(pos), q)
    if isinstance(mount, EgocentricMount):
        ped = pedestrians[mount.pedestrian]
        q = quat_from_euler(ped.heading)
        pos = np.asarray(ped.position) + quat_to_matrix(q) @ np.asarray(mount.eye_offset)
        return Pose(tuple(pos), q)
    raise TypeError(f"unknown mount {mount!r}")


def run_simulation(scenario: Scenario) -> SimTrace:
    """Simulate ``scenario.duration_frames`` ticks.

    Tick 0 holds the spawn state; each later tick steps every pedestrian by
    ``1/fps`` and then poses every camera from the updated pedestrians.
    """
    dt = 1.0 / scenario.fps
    specs = scenario.pedestrians
    rngs = {p.name: entity_rng(scenario.seed, "pedestrian", p.name) for p in specs}
    states = [initial_state(p, scenario, rngs[p.name]) for p in specs]
    ticks = []
    for k in range(scenario.duration_frames):
        if k > 0:
            states = [step_pedestrian(s, p, scenario, dt, rngs[p.name]) for s, p in zip(states, specs)]
        by_name = {s.name: s for s in states}
        t = k / scenario.fps
        cams = {c.id: step_camera(c.mount, t, by_name) for c in scenario.cameras}
        ticks.append(Tick(k, t, tuple(states), cams))
    return SimTrace(scenario.name, scenario.fps, tuple(ticks))
