import dataclasses
import math

import pytest
from conftest import SHIPPED, tiny_scenario
from hypothesis import given, settings
from hypothesis import strategies as st

from pedsim.scenario import (
    ConfigSyntaxError,
    FollowPath,
    PedestrianSpec,
    RandomTargets,
    ScenarioError,
    TargetPoint,
    dump_scenario,
    load_scenario,
    parse_degradation,
    parse_scenario,
    shipped_scenario_path,
    shipped_scenarios,
    validate_scenario,
)

HEADER = 'format = 1\nname = "t"\nduration_frames = 10\n'

CAMERA = """
[[cameras]]
id = "cam0"
width = 640
height = 480
hfov_deg = 90.0
mount = "static"
position = [0.0, 0.0, -2.0]
yaw_deg = 0.0
"""


def codes(exc_info):
    return [v.code for v in exc_info.value.violations]


def test_all_shipped_configs_are_listed():
    assert sorted(shipped_scenarios()) == sorted(SHIPPED)


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_configs_parse_and_validate(name):
    s = load_scenario(name)
    assert s.name == name
    assert validate_scenario(s) == []


@pytest.mark.parametrize(
    "name,frames,size,mount",
    [
        ("street_day", 500, (1920, 1080), "StaticMount"),
        ("street_night", 500, (1920, 1080), "StaticMount"),
        ("font_fog", 900, (1920, 1080), "StaticMount"),
        ("street_moving", 500, (1920, 1080), "DroneWaypoints"),
        ("font_midday", 900, (1920, 1080), "StaticMount"),
        ("font_moving", 600, (640, 480), "DroneWaypoints"),
    ],
)
def test_shipped_configs_match_recording_table(name, frames, size, mount):
    s = load_scenario(name)
    cam = s.cameras[0]
    assert s.duration_frames == frames
    assert (cam.intrinsics.width_px, cam.intrinsics.height_px) == size
    assert type(cam.mount).__name__ == mount
    kinds = {type(p.controller).__name__ for p in s.pedestrians}
    if name.startswith("font"):
        assert kinds == {"RandomTargets"}
    else:
        assert "CustomizedTargets" in kinds


@pytest.mark.parametrize("name", SHIPPED)
def test_canonical_round_trip(name):
    s = load_scenario(name)
    text = dump_scenario(s)
    assert parse_scenario(text) == s
    assert dump_scenario(parse_scenario(text)) == text


def test_parsing_is_deterministic():
    text = shipped_scenario_path("font_fog").read_text()
    assert parse_scenario(text) == parse_scenario(text)


def test_dangling_path_is_named():
    text = HEADER + CAMERA + '\n[[pedestrians]]\nname = "p"\nspawn = [1.0, 0.0, 0.0]\ncontroller = "path"\npath = "missing"\n'
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert codes(exc) == ["DanglingPath"]
    assert "missing" in str(exc.value)


def test_all_violations_reported_not_just_first():
    text = HEADER.replace("duration_frames = 10", "duration_frames = 0") + (
        '\n[[pedestrians]]\nname = "a"\nspawn = [0.0, 0.0, 0.0]\ncontroller = "customized"\n'
        '\n[[pedestrians]]\nname = "a"\nspawn = [0.0, 0.0, 0.0]\nspeed = -1.0\ncontroller = "random"\narea = "x"\n'
    )
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    found = set(codes(exc))
    assert {"OutOfRange", "DuplicateName", "NoOwnedGoals", "InsufficientGoals"} <= found


def test_syntax_error_has_position():
    with pytest.raises(ConfigSyntaxError) as exc:
        parse_scenario(HEADER + "broken = [1, 2\n")
    assert exc.value.line is not None and exc.value.column is not None


def test_missing_or_wrong_format_header():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario('name = "t"\nduration_frames = 1\n')
    assert "MissingField" in codes(exc)
    with pytest.raises(ScenarioError) as exc:
        parse_scenario('format = 2\nname = "t"\nduration_frames = 1\n')
    assert "UnsupportedFormat" in codes(exc)


def test_unknown_keys_rejected():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(HEADER + "colour = 3\n")
    assert codes(exc) == ["UnknownKey"]


def test_duplicate_pedestrian_name():
    s = tiny_scenario()
    s = dataclasses.replace(s, pedestrians=s.pedestrians + (dataclasses.replace(s.pedestrians[0]),))
    assert [v.code for v in validate_scenario(s)] == ["DuplicateName"]
    assert validate_scenario(s)[0].subject == "alice"


def test_area_with_one_goal_is_insufficient():
    s = tiny_scenario(
        target_points=(TargetPoint("only", (1.0, 0.0, 0.0), "lonely"),),
        pedestrians=(PedestrianSpec("p", (0.0, 0.0, 0.0), RandomTargets("lonely")),),
    )
    assert [v.code for v in validate_scenario(s)] == ["InsufficientGoals"]


def test_duplicate_creation_index():
    s = tiny_scenario()
    tps = list(s.target_points)
    tps[1] = dataclasses.replace(tps[1], creation_index=0)
    assert "DuplicateCreationIndex" in [v.code for v in validate_scenario(dataclasses.replace(s, target_points=tuple(tps)))]


def test_height_range_enforced():
    s = tiny_scenario()
    peds = (dataclasses.replace(s.pedestrians[0], height=2.5),) + s.pedestrians[1:]
    assert [v.code for v in validate_scenario(dataclasses.replace(s, pedestrians=peds))] == ["OutOfRange"]


def test_validation_is_order_stable(tiny):
    bad = dataclasses.replace(
        tiny,
        duration_frames=-1,
        pedestrians=tiny.pedestrians + (PedestrianSpec("x", (0, 0, 0), FollowPath("nope")),),
    )
    assert validate_scenario(bad) == validate_scenario(bad)
    assert len(validate_scenario(bad)) == 2


def test_degradation_ranges():
    with pytest.raises(ScenarioError):
        parse_degradation({"base_detect_prob": 1.5})
    with pytest.raises(ScenarioError):
        parse_degradation({"fog": 1.0})
    spec = parse_degradation({"fog_extinction": 0.1, "night_factor": 0.5})
    assert spec.fog_extinction == 0.1 and spec.night_factor == 0.5


def test_hfov_degrees_and_radians_agree():
    a = parse_scenario(HEADER + CAMERA)
    b = parse_scenario(HEADER + CAMERA.replace("hfov_deg = 90.0", f"hfov_rad = {math.pi / 2!r}"))
    assert a.cameras[0].intrinsics == b.cameras[0].intrinsics


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 10_000),
    st.integers(-(2**63), 2**63 - 1),
    st.floats(1.0, 120.0),
    st.lists(st.floats(0.2, 3.0), min_size=3, max_size=3),
)
def test_round_trip_property(frames, seed, fps, speeds):
    s = tiny_scenario(duration_frames=frames, seed=seed, fps=fps)
    s = dataclasses.replace(
        s, pedestrians=tuple(dataclasses.replace(p, speed=v) for p, v in zip(s.pedestrians, speeds))
    )
    assert validate_scenario(s) == []
    assert parse_scenario(dump_scenario(s)) == s
