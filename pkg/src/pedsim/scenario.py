"""Declarative scenario description: parsing, validation and canonical serialization.

Scenario files are TOML documents with a mandatory ``format = 1`` header.
A minimal file::

    format = 1
    name = "demo"
    duration_frames = 300

    [[target_points]]
    id = "a"
    position = [0, 0, 0]
    area = "plaza"

    [[pedestrians]]
    name = "ped0"
    spawn = [1, 1, 0]
    controller = "random"
    area = "plaza"

See ``docs``-style comments in the shipped configs under ``pedsim/scenarios``
for every supported key.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

try:  # pragma: no cover - depends on interpreter version
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .geometry import CameraIntrinsics, Pose, Vec3, look_at_quaternion, quat_from_euler, vec3

FORMAT_VERSION = 1
END_BEHAVIORS = ("loop", "reverse", "stop")
MIN_VERTEX_SEPARATION = 0.01


# -- domain types -----------------------------------------------------------------


@dataclass(frozen=True)
class Obstacle:
    id: str
    min_corner: Vec3
    max_corner: Vec3


@dataclass(frozen=True)
class ContinuousPath:
    id: str
    vertices: tuple[Vec3, ...]
    end_behavior: str = "loop"


@dataclass(frozen=True)
class TargetPoint:
    id: str
    position: Vec3
    area: str
    owner_tag: str | None = None
    creation_index: int = 0


@dataclass(frozen=True)
class RandomTargets:
    area: str


@dataclass(frozen=True)
class CustomizedTargets:
    end_behavior: str = "loop"


@dataclass(frozen=True)
class FollowPath:
    path_id: str
    end_behavior: str | None = None  # None: inherit from the path


Controller = Union[RandomTargets, CustomizedTargets, FollowPath]


@dataclass(frozen=True)
class PedestrianSpec:
    name: str
    spawn: Vec3
    controller: Controller
    height: float = 1.75
    radius: float = 0.30
    speed: float = 1.4


@dataclass(frozen=True)
class StaticMount:
    pose: Pose


@dataclass(frozen=True)
class DroneWaypoints:
    """Constant-speed flight along ``waypoints``.

    Orientation either tracks the fixed ``look_at`` point or, when ``look_at``
    is None, yaws along the current flight segment with a constant ``pitch_rad``.
    """

    waypoints: tuple[Vec3, ...]
    speed: float
    look_at: Vec3 | None = None
    pitch_rad: float = 0.0


@dataclass(frozen=True)
class EgocentricMount:
    pedestrian: str
    eye_offset: Vec3  # pedestrian body frame: forward, right, down


Mount = Union[StaticMount, DroneWaypoints, EgocentricMount]


@dataclass(frozen=True)
class CameraSpec:
    id: str
    intrinsics: CameraIntrinsics
    mount: Mount


@dataclass(frozen=True)
class DegradationSpec:
    fog_extinction: float = 0.0
    base_detect_prob: float = 1.0
    night_factor: float = 1.0
    bbox_noise_sigma: float = 0.0
    false_positive_rate: float = 0.0
    visibility_exponent: float = 0.0


@dataclass(frozen=True)
class Scenario:
    name: str
    duration_frames: int
    fps: float = 30.0
    seed: int = 0
    description: str = ""
    obstacles: tuple[Obstacle, ...] = ()
    paths: tuple[ContinuousPath, ...] = ()
    target_points: tuple[TargetPoint, ...] = ()
    pedestrians: tuple[PedestrianSpec, ...] = ()
    cameras: tuple[CameraSpec, ...] = ()
    degradation: DegradationSpec = field(default_factory=DegradationSpec)

    def pedestrian(self, name: str) -> PedestrianSpec:
        for p in self.pedestrians:
            if p.name == name:
                return p
        raise KeyError(name)

    def camera(self, camera_id: str) -> CameraSpec:
        for c in self.cameras:
            if c.id == camera_id:
                return c
        raise KeyError(camera_id)

    def path(self, path_id: str) -> ContinuousPath:
        for p in self.paths:
            if p.id == path_id:
                return p
        raise KeyError(path_id)

    def owned_goals(self, owner: str) -> list[TargetPoint]:
        """Targets tagged with ``owner``, oldest (lowest creation_index) first."""
        return sorted((t for t in self.target_points if t.owner_tag == owner), key=lambda t: t.creation_index)

    def area_goals(self, area: str) -> list[TargetPoint]:
        return [t for t in self.target_points if t.area == area]

    def pedestrian_ids(self) -> dict[str, int]:
        """Stable integer ids (1-based ordinal of the sorted names); 0 is background."""
        return {name: i + 1 for i, name in enumerate(sorted(p.name for p in self.pedestrians))}


# -- errors --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self):
        return f"{self.code}({self.subject}): {self.message}"


class ScenarioError(ValueError):
    """The document parsed but describes an invalid scenario."""

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("\n".join(str(v) for v in self.violations))


class ConfigSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None, column: int | None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}" if line is not None else "unknown position"
        super().__init__(f"syntax error at {where}: {message}")


# -- validation ------------------------------------------------------------------------


def _check_range(out, subject, value, lo=None, hi=None, lo_open=False, hi_open=False):
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        if not (isinstance(value, float) and value == math.inf and hi is None):
            out.append(Violation("OutOfRange", subject, f"{value!r} is not a finite number"))
            return
    bad = False
    if lo is not None:
        bad |= value <= lo if lo_open else value < lo
    if hi is not None:
        bad |= value >= hi if hi_open else value > hi
    if bad:
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        out.append(Violation("OutOfRange", subject, f"{value!r} outside {lb}{lo}, {hi}{rb}"))


def _duplicates(names):
    seen, dup = set(), []
    for n in names:
        if n in seen and n not in dup:
            dup.append(n)
        seen.add(n)
    return dup


def validate_scenario(s: Scenario) -> list[Violation]:
    """Every invariant violation of ``s``, in a stable order. Empty means valid."""
    out: list[Violation] = []
    if s.duration_frames <= 0:
        out.append(Violation("OutOfRange", "duration_frames", f"{s.duration_frames} must be positive"))
    _check_range(out, "fps", s.fps, lo=0.0, lo_open=True)

    for kind, names in (
        ("obstacle", [o.id for o in s.obstacles]),
        ("path", [p.id for p in s.paths]),
        ("target_point", [t.id for t in s.target_points]),
        ("pedestrian", [p.name for p in s.pedestrians]),
        ("camera", [c.id for c in s.cameras]),
    ):
        for name in _duplicates(names):
            out.append(Violation("DuplicateName", name, f"{kind} name {name!r} used more than once"))

    for o in s.obstacles:
        if not all(a < b for a, b in zip(o.min_corner, o.max_corner)):
            out.append(Violation("BadObstacle", o.id, "min corner must be below max corner on every axis"))

    for p in s.paths:
        if len(p.vertices) < 2:
            out.append(Violation("DegeneratePath", p.id, "a path needs at least 2 vertices"))
        for i, (a, b) in enumerate(zip(p.vertices, p.vertices[1:])):
            if math.dist(a, b) <= MIN_VERTEX_SEPARATION:
                out.append(Violation("DegeneratePath", p.id, f"vertices {i} and {i + 1} closer than 1 cm"))
        if p.end_behavior not in END_BEHAVIORS:
            out.append(Violation("OutOfRange", f"{p.id}.end_behavior", f"{p.end_behavior!r} not in {END_BEHAVIORS}"))

    ped_names = {p.name for p in s.pedestrians}
    seen_idx: dict[tuple[str, int], str] = {}
    for t in s.target_points:
        if t.owner_tag is None:
            continue
        if t.owner_tag not in ped_names:
            out.append(Violation("UnknownPedestrian", t.id, f"owner {t.owner_tag!r} is not a pedestrian"))
        key = (t.owner_tag, t.creation_index)
        if key in seen_idx:
            out.append(
                Violation("DuplicateCreationIndex", t.id, f"creation_index {t.creation_index} already used by {seen_idx[key]!r}")
            )
        else:
            seen_idx[key] = t.id

    path_ids = {p.id for p in s.paths}
    for p in s.pedestrians:
        _check_range(out, f"{p.name}.speed", p.speed, lo=0.0, lo_open=True)
        _check_range(out, f"{p.name}.height", p.height, lo=1.4, hi=2.1)
        _check_range(out, f"{p.name}.radius", p.radius, lo=0.0, lo_open=True)
        c = p.controller
        if isinstance(c, FollowPath):
            if c.path_id not in path_ids:
                out.append(Violation("DanglingPath", p.name, f"path {c.path_id!r} does not exist"))
            if c.end_behavior is not None and c.end_behavior not in END_BEHAVIORS:
                out.append(Violation("OutOfRange", f"{p.name}.end_behavior", f"{c.end_behavior!r} not in {END_BEHAVIORS}"))
        elif isinstance(c, CustomizedTargets):
            if not s.owned_goals(p.name):
                out.append(Violation("NoOwnedGoals", p.name, "customized pedestrian owns no target points"))
            if c.end_behavior not in END_BEHAVIORS:
                out.append(Violation("OutOfRange", f"{p.name}.end_behavior", f"{c.end_behavior!r} not in {END_BEHAVIORS}"))
        elif isinstance(c, RandomTargets):
            n = len(s.area_goals(c.area))
            if n < 2:
                out.append(Violation("InsufficientGoals", p.name, f"area {c.area!r} holds {n} target point(s), need >= 2"))

    for c in s.cameras:
        m = c.mount
        if isinstance(m, DroneWaypoints):
            if len(m.waypoints) < 2:
                out.append(Violation("InsufficientWaypoints", c.id, "a drone needs at least 2 waypoints"))
            _check_range(out, f"{c.id}.speed", m.speed, lo=0.0, lo_open=True)
        elif isinstance(m, EgocentricMount) and m.pedestrian not in ped_names:
            out.append(Violation("UnknownPedestrian", c.id, f"egocentric camera rides unknown pedestrian {m.pedestrian!r}"))

    d = s.degradation
    _check_range(out, "degradation.fog_extinction", d.fog_extinction, lo=0.0)
    _check_range(out, "degradation.base_detect_prob", d.base_detect_prob, lo=0.0, hi=1.0)
    _check_range(out, "degradation.night_factor", d.night_factor, lo=0.0, hi=1.0)
    _check_range(out, "degradation.bbox_noise_sigma", d.bbox_noise_sigma, lo=0.0)
    _check_range(out, "degradation.false_positive_rate", d.false_positive_rate, lo=0.0)
    _check_range(out, "degradation.visibility_exponent", d.visibility_exponent, lo=0.0)
    return out


# -- parsing -------------------------------------------------------------------------


class _Reader:
    """Pulls typed fields out of plain TOML tables, recording problems instead of raising."""

    def __init__(self):
        self.errors: list[Violation] = []

    def err(self, code, subject, message):
        self.errors.append(Violation(code, subject, message))

    def take(self, table, key, where, kind, default=..., required=True):
        if key not in table:
            if default is not ...:
                return default
            self.err("MissingField", where, f"missing required key {key!r}")
            return None
        value = table[key]
        try:
            return kind(value)
        except (TypeError, ValueError) as exc:
            self.err("InvalidField", f"{where}.{key}", f"{value!r}: {exc}")
            return None

    def unknown(self, table, allowed, where):
        for key in table:
            if key not in allowed:
                self.err("UnknownKey", where, f"unexpected key {key!r}")


def _number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError("expected a number")
    return float(v)


def _integer(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError("expected an integer")
    return v


def _string(v):
    if not isinstance(v, str):
        raise TypeError("expected a string")
    return v


def _point(v):
    if not isinstance(v, list) or len(v) != 3:
        raise TypeError("expected a list of 3 numbers")
    return vec3(_number(c) for c in v)


def _points(v):
    if not isinstance(v, list):
        raise TypeError("expected a list of points")
    return tuple(_point(p) for p in v)


def _tables(doc, key, r: _Reader):
    items = doc.get(key, [])
    if not isinstance(items, list) or not all(isinstance(t, dict) for t in items):
        r.err("InvalidField", key, "expected an array of tables")
        return []
    return items


def _parse_camera(t, where, r: _Reader) -> CameraSpec | None:
    cam_id = r.take(t, "id", where, _string)
    where = f"camera {cam_id}" if cam_id else where
    width = r.take(t, "width", where, _integer)
    height = r.take(t, "height", where, _integer)
    if "hfov_rad" in t:
        hfov = r.take(t, "hfov_rad", where, _number)
    else:
        hfov_deg = r.take(t, "hfov_deg", where, _number, default=90.0)
        hfov = math.radians(hfov_deg) if hfov_deg is not None else None
    kind = r.take(t, "mount", where, _string)
    common = {"id", "width", "height", "hfov_rad", "hfov_deg", "mount"}
    mount = None
    if kind == "static":
        r.unknown(t, common | {"position", "quaternion", "look_at", "yaw_deg", "pitch_deg"}, where)
        pos = r.take(t, "position", where, _point)
        if pos is not None:
            if "quaternion" in t:
                q = r.take(t, "quaternion", where, lambda v: tuple(_number(c) for c in v))
            elif "look_at" in t:
                target = r.take(t, "look_at", where, _point)
                try:
                    q = look_at_quaternion(pos, target) if target is not None else None
                except ValueError as exc:
                    r.err("InvalidField", f"{where}.look_at", str(exc))
                    q = None
            else:
                yaw = r.take(t, "yaw_deg", where, _number, default=0.0)
                pitch = r.take(t, "pitch_deg", where, _number, default=0.0)
                q = quat_from_euler(math.radians(yaw), math.radians(pitch)) if None not in (yaw, pitch) else None
            if q is not None:
                try:
                    mount = StaticMount(Pose(pos, q))
                except ValueError as exc:
                    r.err("InvalidField", f"{where}.quaternion", str(exc))
    elif kind == "drone":
        r.unknown(t, common | {"waypoints", "speed", "look_at", "pitch_deg", "pitch_rad"}, where)
        wps = r.take(t, "waypoints", where, _points)
        speed = r.take(t, "speed", where, _number)
        look_at = r.take(t, "look_at", where, _point, default=None)
        if "pitch_rad" in t:
            pitch = r.take(t, "pitch_rad", where, _number)
        else:
            pitch_deg = r.take(t, "pitch_deg", where, _number, default=0.0)
            pitch = math.radians(pitch_deg) if pitch_deg is not None else None
        if None not in (wps, speed, pitch):
            mount = DroneWaypoints(wps, speed, look_at, pitch if look_at is None else 0.0)
    elif kind == "egocentric":
        r.unknown(t, common | {"pedestrian", "eye_offset"}, where)
        ped = r.take(t, "pedestrian", where, _string)
        offset = r.take(t, "eye_offset", where, _point, default=(0.0, 0.0, -1.6))
        if None not in (ped, offset):
            mount = EgocentricMount(ped, offset)
    elif kind is not None:
        r.err("InvalidField", f"{where}.mount", f"{kind!r} not in ('static', 'drone', 'egocentric')")
    if None in (cam_id, width, height, hfov, mount):
        return None
    try:
        intrinsics = CameraIntrinsics(width, height, hfov)
    except ValueError as exc:
        r.err("OutOfRange", f"{where}.intrinsics", str(exc))
        return None
    return CameraSpec(cam_id, intrinsics, mount)


def _parse_pedestrian(t, where, r: _Reader) -> PedestrianSpec | None:
    name = r.take(t, "name", where, _string)
    where = f"pedestrian {name}" if name else where
    r.unknown(t, {"name", "spawn", "height", "radius", "speed", "controller", "area", "path", "end_behavior"}, where)
    spawn = r.take(t, "spawn", where, _point)
    height = r.take(t, "height", where, _number, default=1.75)
    radius = r.take(t, "radius", where, _number, default=0.30)
    speed = r.take(t, "speed", where, _number, default=1.4)
    kind = r.take(t, "controller", where, _string)
    controller = None
    if kind == "random":
        area = r.take(t, "area", where, _string)
        controller = RandomTargets(area) if area is not None else None
    elif kind == "customized":
        controller = CustomizedTargets(r.take(t, "end_behavior", where, _string, default="loop"))
    elif kind == "path":
        path = r.take(t, "path", where, _string)
        end = r.take(t, "end_behavior", where, _string, default=None)
        controller = FollowPath(path, end) if path is not None else None
    elif kind is not None:
        r.err("InvalidField", f"{where}.controller", f"{kind!r} not in ('random', 'customized', 'path')")
    if None in (name, spawn, height, radius, speed, controller):
        return None
    return PedestrianSpec(name, spawn, controller, height, radius, speed)


def _parse_document(doc: dict) -> tuple[Scenario | None, list[Violation]]:
    r = _Reader()
    top_keys = {
        "format", "name", "description", "duration_frames", "fps", "seed",
        "degradation", "obstacles", "paths", "target_points", "pedestrians", "cameras",
    }  # fmt: skip
    if "format" not in doc:
        r.err("MissingField", "format", f"missing version header `format = {FORMAT_VERSION}`")
    elif doc.get("format") != FORMAT_VERSION:
        r.err("UnsupportedFormat", "format", f"expected format = {FORMAT_VERSION}, got {doc.get('format')!r}")
    r.unknown(doc, top_keys, "scenario")
    name = r.take(doc, "name", "scenario", _string)
    duration = r.take(doc, "duration_frames", "scenario", _integer)
    fps = r.take(doc, "fps", "scenario", _number, default=30.0)
    seed = r.take(doc, "seed", "scenario", _integer, default=0)
    description = r.take(doc, "description", "scenario", _string, default="")

    obstacles = []
    for i, t in enumerate(_tables(doc, "obstacles", r)):
        where = f"obstacles[{i}]"
        r.unknown(t, {"id", "min", "max"}, where)
        vals = (r.take(t, "id", where, _string), r.take(t, "min", where, _point), r.take(t, "max", where, _point))
        if None not in vals:
            obstacles.append(Obstacle(*vals))

    paths = []
    for i, t in enumerate(_tables(doc, "paths", r)):
        where = f"paths[{i}]"
        r.unknown(t, {"id", "vertices", "end_behavior"}, where)
        vals = (
            r.take(t, "id", where, _string),
            r.take(t, "vertices", where, _points),
            r.take(t, "end_behavior", where, _string, default="loop"),
        )
        if None not in vals:
            paths.append(ContinuousPath(*vals))

    targets = []
    for i, t in enumerate(_tables(doc, "target_points", r)):
        where = f"target_points[{i}]"
        r.unknown(t, {"id", "position", "area", "owner", "creation_index"}, where)
        tid = r.take(t, "id", where, _string)
        pos = r.take(t, "position", where, _point)
        area = r.take(t, "area", where, _string, default="")
        owner = r.take(t, "owner", where, _string, default=None)
        idx = r.take(t, "creation_index", where, _integer, default=i)
        if None not in (tid, pos, area, idx):
            targets.append(TargetPoint(tid, pos, area, owner, idx))

    peds = [p for i, t in enumerate(_tables(doc, "pedestrians", r)) if (p := _parse_pedestrian(t, f"pedestrians[{i}]", r))]
    cams = [c for i, t in enumerate(_tables(doc, "cameras", r)) if (c := _parse_camera(t, f"cameras[{i}]", r))]

    deg_table = doc.get("degradation", {})
    degradation = DegradationSpec()
    if isinstance(deg_table, dict):
        degradation = parse_degradation(deg_table, r)
    else:
        r.err("InvalidField", "degradation", "expected a table")

    if None in (name, duration, fps, seed, description):
        return None, r.errors
    scenario = Scenario(
        name=name,
        duration_frames=duration,
        fps=fps,
        seed=seed,
        description=description,
        obstacles=tuple(obstacles),
        paths=tuple(paths),
        target_points=tuple(targets),
        pedestrians=tuple(peds),
        cameras=tuple(cams),
        degradation=degradation,
    )
    return scenario, r.errors


def parse_degradation(table: dict, reader: _Reader | None = None) -> DegradationSpec:
    r = reader or _Reader()
    names = [f.name for f in DegradationSpec.__dataclass_fields__.values()]
    r.unknown(table, set(names), "degradation")
    defaults = DegradationSpec()
    values = {}
    for n in names:
        v = r.take(table, n, "degradation", _number, default=getattr(defaults, n))
        values[n] = getattr(defaults, n) if v is None else v
    spec = DegradationSpec(**values)
    if reader is None:
        errors = r.errors + [v for v in validate_scenario(Scenario("_", 1, degradation=spec))]
        if errors:
            raise ScenarioError(errors)
    return spec


def load_toml(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigSyntaxError(getattr(exc, "msg", str(exc)), getattr(exc, "lineno", None), getattr(exc, "colno", None)) from None


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises:
        ConfigSyntaxError: the text is not well-formed TOML.
        ScenarioError: the document is well-formed but violates one or more
            invariants; ``.violations`` lists all of them.
    """
    scenario, errors = _parse_document(load_toml(text))
    if scenario is not None:
        errors = errors + validate_scenario(scenario)
    if errors:
        raise ScenarioError(errors)
    return scenario


def load_scenario(path) -> Scenario:
    """Load a scenario from a file path or the name of a shipped scenario."""
    p = Path(path)
    if not p.exists() and str(path) in shipped_scenarios():
        p = shipped_scenario_path(str(path))
    return parse_scenario(p.read_text(encoding="utf-8"))


def shipped_scenarios() -> list[str]:
    root = resources.files("pedsim") / "scenarios"
    return sorted(f.name[:-4] for f in root.iterdir() if f.name.endswith(".cfg"))


def shipped_scenario_path(name: str) -> Path:
    return Path(str(resources.files("pedsim") / "scenarios" / f"{name}.cfg"))


# -- canonical serialization -------------------------------------------------------------


def _mount_dict(m: Mount) -> dict:
    if isinstance(m, StaticMount):
        return {"mount": "static", "position": list(m.pose.position), "quaternion": list(m.pose.quaternion)}
    if isinstance(m, DroneWaypoints):
        d = {"mount": "drone", "waypoints": [list(w) for w in m.waypoints], "speed": m.speed}
        if m.look_at is not None:
            d["look_at"] = list(m.look_at)
        else:
            d["pitch_rad"] = m.pitch_rad
        return d
    return {"mount": "egocentric", "pedestrian": m.pedestrian, "eye_offset": list(m.eye_offset)}


def _controller_dict(c: Controller) -> dict:
    if isinstance(c, RandomTargets):
        return {"controller": "random", "area": c.area}
    if isinstance(c, CustomizedTargets):
        return {"controller": "customized", "end_behavior": c.end_behavior}
    d = {"controller": "path", "path": c.path_id}
    if c.end_behavior is not None:
        d["end_behavior"] = c.end_behavior
    return d


def scenario_to_dict(s: Scenario) -> dict:
    doc = {
        "format": FORMAT_VERSION,
        "name": s.name,
        "description": s.description,
        "duration_frames": s.duration_frames,
        "fps": s.fps,
        "seed": s.seed,
        "degradation": {k: getattr(s.degradation, k) for k in DegradationSpec.__dataclass_fields__},
    }
    if s.obstacles:
        doc["obstacles"] = [{"id": o.id, "min": list(o.min_corner), "max": list(o.max_corner)} for o in s.obstacles]
    if s.paths:
        doc["paths"] = [
            {"id": p.id, "vertices": [list(v) for v in p.vertices], "end_behavior": p.end_behavior} for p in s.paths
        ]
    if s.target_points:
        doc["target_points"] = []
        for t in s.target_points:
            d = {"id": t.id, "position": list(t.position), "area": t.area, "creation_index": t.creation_index}
            if t.owner_tag is not None:
                d["owner"] = t.owner_tag
            doc["target_points"].append(d)
    if s.pedestrians:
        doc["pedestrians"] = [
            {"name": p.name, "spawn": list(p.spawn), "height": p.height, "radius": p.radius, "speed": p.speed}
            | _controller_dict(p.controller)
            for p in s.pedestrians
        ]
    if s.cameras:
        doc["cameras"] = [
            {"id": c.id, "width": c.intrinsics.width_px, "height": c.intrinsics.height_px, "hfov_rad": c.intrinsics.hfov_rad}
            | _mount_dict(c.mount)
            for c in s.cameras
        ]
    return doc


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {v!r}")


def dump_scenario(s: Scenario) -> str:
    """Canonical text form; ``parse_scenario(dump_scenario(s)) == s`` for valid ``s``."""
    doc = scenario_to_dict(s)
    lines = []
    for key, value in doc.items():
        if not isinstance(value, (dict, list)) or (isinstance(value, list) and value and not isinstance(value[0], dict)):
            lines.append(f"{key} = {_toml_value(value)}")
    for key, value in doc.items():
        if isinstance(value, dict):
            lines += ["", f"[{key}]"] + [f"{k} = {_toml_value(v)}" for k, v in value.items()]
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for table in value:
                lines += ["", f"[[{key}]]"] + [f"{k} = {_toml_value(v)}" for k, v in table.items()]
    return "\n".join(lines) + "\n"
