from __future__ import annotations

import functools
import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pedsim.annotation import annotation_file  # noqa: E402
from pedsim.geometry import CameraIntrinsics, Pose, look_at_quaternion  # noqa: E402
from pedsim.scenario import (  # noqa: E402
    CameraSpec,
    CustomizedTargets,
    Obstacle,
    PedestrianSpec,
    RandomTargets,
    Scenario,
    StaticMount,
    TargetPoint,
    load_scenario,
)
from pedsim.simulation import run_simulation  # noqa: E402

SHIPPED = ["street_day", "street_night", "font_fog", "street_moving", "font_midday", "font_moving"]


@functools.lru_cache(maxsize=None)
def shipped(name: str):
    """(scenario, trace, annotation file) for a shipped scenario, computed once per session."""
    s = load_scenario(name)
    trace = run_simulation(s)
    return s, trace, annotation_file(trace, s, s.cameras[0].id)


def static_camera(eye=(0.0, 0.0, -1.0), target=(10.0, 0.0, -1.0), width=1920, height=1080, hfov_deg=90.0):
    pose = Pose(eye, look_at_quaternion(eye, target))
    return CameraSpec("cam0", CameraIntrinsics(width, height, math.radians(hfov_deg)), StaticMount(pose))


def tiny_scenario(**overrides) -> Scenario:
    """Two customized walkers and a random-mode walker in front of a static camera."""
    goals = (
        TargetPoint("a1", (8.0, -2.0, 0.0), "main", "alice", 0),
        TargetPoint("a2", (8.0, 2.0, 0.0), "main", "alice", 1),
        TargetPoint("b1", (12.0, 2.0, 0.0), "main", "bob", 0),
        TargetPoint("r1", (15.0, -3.0, 0.0), "park"),
        TargetPoint("r2", (15.0, 3.0, 0.0), "park"),
        TargetPoint("r3", (18.0, 0.0, 0.0), "park"),
    )
    base = dict(
        name="tiny",
        duration_frames=60,
        seed=7,
        target_points=goals,
        obstacles=(Obstacle("box", (20.0, -1.0, -2.0), (21.0, 1.0, 0.0)),),
        pedestrians=(
            PedestrianSpec("alice", (8.0, 0.0, 0.0), CustomizedTargets()),
            PedestrianSpec("bob", (12.0, -2.0, 0.0), CustomizedTargets("stop")),
            PedestrianSpec("carol", (16.0, 0.0, 0.0), RandomTargets("park")),
        ),
        cameras=(static_camera(),),
    )
    base.update(overrides)
    return Scenario(**base)


@pytest.fixture
def tiny():
    return tiny_scenario()


# -- acceptance summary -----------------------------------------------------------------------

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, title, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
