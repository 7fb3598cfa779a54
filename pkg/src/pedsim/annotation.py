"""Per-camera ground truth: boxes, occlusion-aware visibility, instance masks and JSON I/O.

Pedestrians are vertical cylinders standing on their ``position`` (NED, so
the head is at ``z - height``). Each body is summarized by 34 sample points:
16 rim angles on the base circle, the same 16 on the top circle, and the two
axis end points. Bounding boxes and visibility both use these samples.

When the camera is outside the cylinder (horizontally), the rim angles are
anchored on the two tangent generators seen from the camera: 8 samples span
the visible arc with both tangent points included, 8 more cover the hidden
arc. For a level camera the tangent generators are exactly the left and right
silhouette edges, so box widths carry no sampling error in that case.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boxes import BBox2D
from .geometry import BODY_TO_OPTICAL, CameraIntrinsics, Pose, project_points, relative_to_initial, world_to_camera
from .scenario import EgocentricMount, Scenario
from .simulation import SimTrace

RIM_SAMPLES = 16
N_SAMPLES = 2 * RIM_SAMPLES + 2
ANNOTATION_FORMAT = 1
_EPS = 1e-9


@dataclass(frozen=True)
class Cylinder:
    """A pedestrian body in world coordinates."""

    id: int
    position: tuple[float, float, float]
    radius: float
    height: float

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        x, y, z = self.position
        r = self.radius
        return np.array([x - r, y - r, z - self.height]), np.array([x + r, y + r, z])


@dataclass(frozen=True)
class PedestrianAnnotation:
    id: int
    name: str
    position_3d: tuple[float, float, float]
    bbox: BBox2D | None
    visibility: float
    truncated: bool
    distance_m: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "position_3d": list(self.position_3d),
            "distance_m": self.distance_m,
            "bbox": self.bbox.as_list() if self.bbox is not None else None,
            "visibility": self.visibility,
            "truncated": self.truncated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> PedestrianAnnotation:
        bbox = BBox2D(*d["bbox"]) if d.get("bbox") is not None else None
        return cls(d["id"], d["name"], tuple(d["position_3d"]), bbox, d["visibility"], d["truncated"], d["distance_m"])


@dataclass(frozen=True)
class FrameAnnotation:
    frame_index: int
    timestamp_s: float
    camera_id: str
    camera_pose_world: Pose
    camera_pose_relative_initial: Pose
    intrinsics: CameraIntrinsics
    pedestrians: tuple[PedestrianAnnotation, ...] = ()

    def to_dict(self) -> dict:
        return {
            "frame": self.frame_index,
            "timestamp_s": self.timestamp_s,
            "camera_pose_world": self.camera_pose_world.to_dict(),
            "camera_pose_relative_initial": self.camera_pose_relative_initial.to_dict(),
            "pedestrians": [p.to_dict() for p in self.pedestrians],
        }


@dataclass(frozen=True)
class AnnotationFile:
    """One camera's annotations for a whole scenario; the unit written to JSON."""

    scenario: str
    camera_id: str
    fps: float
    seed: int
    intrinsics: CameraIntrinsics
    frames: tuple[FrameAnnotation, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "format_version": ANNOTATION_FORMAT,
            "scenario": self.scenario,
            "camera_id": self.camera_id,
            "fps": self.fps,
            "seed": self.seed,
            "intrinsics": self.intrinsics.to_dict(),
            "frames": [f.to_dict() for f in self.frames],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> AnnotationFile:
        if d.get("format_version") != ANNOTATION_FORMAT:
            raise ValueError(f"unsupported annotation format_version {d.get('format_version')!r}")
        k = d["intrinsics"]
        intr = CameraIntrinsics(k["width"], k["height"], k["hfov_rad"])
        frames = tuple(
            FrameAnnotation(
                f["frame"],
                f["timestamp_s"],
                d["camera_id"],
                Pose.from_dict(f["camera_pose_world"]),
                Pose.from_dict(f["camera_pose_relative_initial"]),
                intr,
                tuple(PedestrianAnnotation.from_dict(p) for p in f["pedestrians"]),
            )
            for f in d["frames"]
        )
        return cls(d["scenario"], d["camera_id"], d["fps"], d["seed"], intr, frames)

    @classmethod
    def from_json(cls, text: str) -> AnnotationFile:
        return cls.from_dict(json.loads(text))

    @classmethod
    def read(cls, path) -> AnnotationFile:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


# -- sampling and projection ------------------------------------------------------------


def rim_angles(center_xy, radius: float, cam_xy) -> np.ndarray:
    dx, dy = cam_xy[0] - center_xy[0], cam_xy[1] - center_xy[1]
    d = math.hypot(dx, dy)
    if d <= radius:
        return np.arange(RIM_SAMPLES) * (2 * math.pi / RIM_SAMPLES)
    bearing = math.atan2(dy, dx)
    half = math.acos(radius / d)
    half_n = RIM_SAMPLES // 2
    front = bearing + np.linspace(-half, half, half_n)
    back = bearing + half + np.linspace(0.0, 2 * math.pi - 2 * half, half_n + 2)[1:-1]
    return np.concatenate([front, back])


def cylinder_samples(position, radius: float, height: float, cam_position) -> np.ndarray:
    """The 34 body samples: base rim, top rim, base center, top center."""
    x, y, z = position
    ang = rim_angles((x, y), radius, cam_position)
    rim = np.stack([x + radius * np.cos(ang), y + radius * np.sin(ang)], axis=1)
    base = np.column_stack([rim, np.full(RIM_SAMPLES, z)])
    top = np.column_stack([rim, np.full(RIM_SAMPLES, z - height)])
    return np.vstack([base, top, [[x, y, z], [x, y, z - height]]])


@dataclass(frozen=True)
class Projection:
    bbox: BBox2D | None  # clamped to the image
    raw_bbox: BBox2D | None  # unclamped extent of the projected samples
    samples: np.ndarray  # (34, 3) world points
    in_frustum: np.ndarray  # (34,) bool
    truncated: bool


def project_pedestrian(position, radius: float, height: float, cam: Pose, K: CameraIntrinsics) -> Projection:
    samples = cylinder_samples(position, radius, height, cam.position)
    uv, in_front = project_points(world_to_camera(samples, cam), K)
    with np.errstate(invalid="ignore"):
        inside = in_front & (uv[:, 0] >= 0) & (uv[:, 0] <= K.width_px) & (uv[:, 1] >= 0) & (uv[:, 1] <= K.height_px)
    if not inside.any():
        return Projection(None, None, samples, inside, False)
    front = uv[in_front]
    raw = BBox2D(float(front[:, 0].min()), float(front[:, 1].min()), float(front[:, 0].max()), float(front[:, 1].max()))
    clamped = raw.clamp(K.width_px, K.height_px)
    truncated = bool((~in_front).any()) or clamped != raw
    return Projection(clamped, raw, samples, inside, truncated)


# -- ray tests -------------------------------------------------------------------------------


def slab_intervals(origin, dirs, lo, hi):
    """Entry/exit parameters of rays ``origin + t*dirs`` through boxes; shape ``(N, M)``.

    ``dirs`` is ``(N, 3)``; ``lo``/``hi`` are ``(M, 3)`` box corners. Misses give ``t_in > t_out``.
    """
    origin = np.asarray(origin, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    t_in = np.full((len(dirs), len(lo)), -np.inf)
    t_out = np.full((len(dirs), len(lo)), np.inf)
    for k in range(3):
        d = dirs[:, k : k + 1]
        parallel = np.abs(d) < 1e-15
        safe = np.where(parallel, 1.0, d)
        t1 = (lo[None, :, k] - origin[k]) / safe
        t2 = (hi[None, :, k] - origin[k]) / safe
        outside = (origin[k] < lo[:, k]) | (origin[k] > hi[:, k])
        near = np.where(parallel, np.where(outside, np.inf, -np.inf), np.minimum(t1, t2))
        far = np.where(parallel, np.where(outside, -np.inf, np.inf), np.maximum(t1, t2))
        t_in = np.maximum(t_in, near)
        t_out = np.minimum(t_out, far)
    return t_in, t_out


def cylinder_intervals(origin, dirs, centers, radii, heights):
    """Entry/exit parameters of rays through solid vertical cylinders; shape ``(N, M)``.

    ``centers`` are the base centers (feet), the top sits at ``z - height``.
    """
    origin = np.asarray(origin, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.asarray(radii, dtype=float).reshape(1, -1)
    heights = np.asarray(heights, dtype=float).reshape(1, -1)
    ox = (origin[0] - centers[:, 0])[None, :]
    oy = (origin[1] - centers[:, 1])[None, :]
    dx, dy = dirs[:, 0:1], dirs[:, 1:2]
    a = dx * dx + dy * dy
    b = 2 * (ox * dx + oy * dy)
    c = ox * ox + oy * oy - radii**2
    disc = b * b - 4 * a * c
    flat = a < 1e-18
    sq = np.sqrt(np.maximum(disc, 0.0))
    safe_a = np.where(flat, 1.0, a)
    inside = c <= 0
    l_in = np.where(flat, np.where(inside, -np.inf, np.inf), (-b - sq) / (2 * safe_a))
    l_out = np.where(flat, np.where(inside, np.inf, -np.inf), (-b + sq) / (2 * safe_a))
    miss = ~flat & (disc < 0)
    l_in = np.where(miss, np.inf, l_in)
    l_out = np.where(miss, -np.inf, l_out)
    lo = np.column_stack([np.zeros(len(centers)), np.zeros(len(centers)), centers[:, 2] - heights[0]])
    hi = np.column_stack([np.zeros(len(centers)), np.zeros(len(centers)), centers[:, 2]])
    zdirs = np.column_stack([np.zeros(len(dirs)), np.zeros(len(dirs)), dirs[:, 2]])
    z_in, z_out = slab_intervals(np.array([0.0, 0.0, origin[2]]), zdirs, lo, hi)
    return np.maximum(l_in, z_in), np.minimum(l_out, z_out)


def _segment_hits(t_in, t_out):
    return (t_in <= t_out) & (t_out > _EPS) & (t_in < 1.0 - 1e-7)


def segment_blocked(origin, targets, obstacles=(), cylinders=(), owners=None) -> np.ndarray:
    """True where the open segment ``origin -> target`` passes through any occluder.

    ``owners`` optionally gives, per target, the id of the cylinder it belongs
    to; a target is never blocked by its own cylinder.
    """
    origin = np.asarray(origin, dtype=float)
    dirs = np.asarray(targets, dtype=float).reshape(-1, 3) - origin
    blocked = np.zeros(len(dirs), dtype=bool)
    if obstacles:
        lo = np.array([o.min_corner for o in obstacles])
        hi = np.array([o.max_corner for o in obstacles])
        blocked |= _segment_hits(*slab_intervals(origin, dirs, lo, hi)).any(axis=1)
    if cylinders:
        t_in, t_out = cylinder_intervals(
            origin,
            dirs,
            [c.position for c in cylinders],
            [c.radius for c in cylinders],
            [c.height for c in cylinders],
        )
        hits = _segment_hits(t_in, t_out)
        if owners is not None:
            hits &= np.asarray(owners)[:, None] != np.array([c.id for c in cylinders])[None, :]
        blocked |= hits.any(axis=1)
    return blocked


def compute_visibility(proj: Projection, cam_position, obstacles=(), other_cylinders=()) -> float:
    """Fraction of all samples that are in the frustum and have a clear line of sight."""
    if not proj.in_frustum.any():
        return 0.0
    idx = np.flatnonzero(proj.in_frustum)
    blocked = segment_blocked(cam_position, proj.samples[idx], tuple(obstacles), tuple(other_cylinders))
    return float((~blocked).sum()) / N_SAMPLES


# -- instance masks ------------------------------------------------------------------------


@dataclass(frozen=True)
class InstanceMask:
    labels: np.ndarray  # (height, width) uint8/uint16, 0 = background or obstacle

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def to_pgm(self) -> bytes:
        if self.labels.max(initial=0) > 255:
            raise ValueError("PGM masks hold at most 255 pedestrian ids")
        header = f"P5\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.labels.astype(np.uint8).tobytes()

    @classmethod
    def from_pgm(cls, data: bytes) -> InstanceMask:
        parts = data.split(maxsplit=4)
        if parts[0] != b"P5":
            raise ValueError("not a binary PGM")
        w, h = int(parts[1]), int(parts[2])
        pixels = np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)
        return cls(pixels.copy())


def pixel_rays(cam: Pose, K: CameraIntrinsics, raster: tuple[int, int]) -> np.ndarray:
    """World-frame ray directions through raster pixel centers, shape (h, w, 3)."""
    w, h = raster
    u = (np.arange(w) + 0.5) * (K.width_px / w)
    v = (np.arange(h) + 0.5) * (K.height_px / h)
    uu, vv = np.meshgrid(u, v)
    optical = np.stack([(uu - K.cx) / K.fx, (vv - K.cy) / K.fy, np.ones_like(uu)], axis=-1)
    body = optical @ BODY_TO_OPTICAL
    return body @ cam.rotation.T


def _cull_window(corners_world, cam: Pose, K: CameraIntrinsics, raster):
    """Raster index window guaranteed to contain the object's image, or the full raster."""
    w, h = raster
    uv, in_front = project_points(world_to_camera(corners_world, cam), K)
    if not in_front.all():
        return slice(0, h), slice(0, w)
    sx, sy = K.width_px / w, K.height_px / h
    j0 = max(int(math.floor(uv[:, 0].min() / sx - 0.5)), 0)
    j1 = min(int(math.ceil(uv[:, 0].max() / sx + 0.5)) + 1, w)
    i0 = max(int(math.floor(uv[:, 1].min() / sy - 0.5)), 0)
    i1 = min(int(math.ceil(uv[:, 1].max() / sy + 0.5)) + 1, h)
    return slice(i0, max(i0, i1)), slice(j0, max(j0, j1))


def _box_corners(lo, hi) -> np.ndarray:
    return np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])


def render_instance_mask(
    cylinders, obstacles, cam: Pose, K: CameraIntrinsics, raster: tuple[int, int] | None = None
) -> InstanceMask:
    """Label each raster pixel with the id of the nearest pedestrian hit by its center ray."""
    if raster is None:
        raster = default_raster(K)
    w, h = raster
    if w <= 0 or h <= 0:
        raise ValueError("raster dimensions must be positive")
    origin = np.asarray(cam.position, dtype=float)
    rays = pixel_rays(cam, K, raster)
    depth = np.full((h, w), np.inf)
    labels = np.zeros((h, w), dtype=np.uint16)

    def hit(window, t_in, t_out, label):
        t = np.maximum(t_in, 0.0)
        ok = (t_in <= t_out) & (t_out > 0) & (t < depth[window])
        depth[window] = np.where(ok, t, depth[window])
        labels[window] = np.where(ok, label, labels[window])

    for o in obstacles:
        lo, hi = np.asarray(o.min_corner), np.asarray(o.max_corner)
        win = _cull_window(_box_corners(lo, hi), cam, K, raster)
        sub = rays[win].reshape(-1, 3)
        if len(sub) == 0:
            continue
        t_in, t_out = slab_intervals(origin, sub, lo, hi)
        shape = rays[win].shape[:2]
        hit(win, t_in.reshape(shape), t_out.reshape(shape), 0)
    for cyl in cylinders:
        win = _cull_window(_box_corners(*cyl.aabb()), cam, K, raster)
        sub = rays[win].reshape(-1, 3)
        if len(sub) == 0:
            continue
        t_in, t_out = cylinder_intervals(origin, sub, cyl.position, cyl.radius, cyl.height)
        shape = rays[win].shape[:2]
        hit(win, t_in.reshape(shape), t_out.reshape(shape), cyl.id)
    return InstanceMask(labels)


def default_raster(K: CameraIntrinsics, divisor: int = 4) -> tuple[int, int]:
    return max(K.width_px // divisor, 1), max(K.height_px // divisor, 1)


# -- per-trace annotation ---------------------------------------------------------------------


def frame_cylinders(scenario: Scenario, tick, exclude: str | None = None) -> list[Cylinder]:
    ids = scenario.pedestrian_ids()
    specs = {p.name: p for p in scenario.pedestrians}
    return [
        Cylinder(ids[s.name], s.position, specs[s.name].radius, specs[s.name].height)
        for s in tick.pedestrians
        if s.name != exclude
    ]


def _carrier(scenario: Scenario, camera_id: str) -> str | None:
    mount = scenario.camera(camera_id).mount
    return mount.pedestrian if isinstance(mount, EgocentricMount) else None


def annotate_tick(tick, scenario: Scenario, camera_id: str, initial_pose: Pose) -> FrameAnnotation:
    cam = tick.cameras[camera_id]
    K = scenario.camera(camera_id).intrinsics
    names = {v: k for k, v in scenario.pedestrian_ids().items()}
    cylinders = frame_cylinders(scenario, tick, exclude=_carrier(scenario, camera_id))
    cam_pos = np.asarray(cam.position)
    cylinders = sorted(cylinders, key=lambda c: c.id)
    projections = [project_pedestrian(c.position, c.radius, c.height, cam, K) for c in cylinders]
    # one batched occlusion query for every in-frustum sample of every pedestrian
    points, owners = [], []
    for cyl, proj in zip(cylinders, projections):
        points.append(proj.samples[proj.in_frustum])
        owners += [cyl.id] * int(proj.in_frustum.sum())
    clear_counts: dict[int, int] = {}
    if owners:
        blocked = segment_blocked(cam_pos, np.vstack(points), tuple(scenario.obstacles), tuple(cylinders), owners)
        for owner, b in zip(owners, blocked):
            clear_counts[owner] = clear_counts.get(owner, 0) + (not b)
    peds = []
    for cyl, proj in zip(cylinders, projections):
        vis = clear_counts.get(cyl.id, 0) / N_SAMPLES
        if proj.bbox is None or vis <= 0.0:
            continue
        dist = float(np.linalg.norm(np.asarray(cyl.position) - cam_pos))
        peds.append(PedestrianAnnotation(cyl.id, names[cyl.id], cyl.position, proj.bbox, vis, proj.truncated, dist))
    return FrameAnnotation(
        tick.index, tick.timestamp, camera_id, cam, relative_to_initial(cam, initial_pose), K, tuple(peds)
    )


def annotate_trace(trace: SimTrace, scenario: Scenario, camera_id: str) -> list[FrameAnnotation]:
    """One FrameAnnotation per tick; zero-visibility pedestrians are omitted."""
    if camera_id not in {c.id for c in scenario.cameras}:
        raise KeyError(f"unknown camera {camera_id!r}")
    if not trace.ticks:
        return []
    initial = trace.ticks[0].cameras[camera_id]
    return [annotate_tick(t, scenario, camera_id, initial) for t in trace.ticks]


def annotation_file(trace: SimTrace, scenario: Scenario, camera_id: str) -> AnnotationFile:
    frames = annotate_trace(trace, scenario, camera_id)
    return AnnotationFile(
        scenario.name, camera_id, scenario.fps, scenario.seed, scenario.camera(camera_id).intrinsics, tuple(frames)
    )


def render_tick_mask(tick, scenario: Scenario, camera_id: str, raster=None) -> InstanceMask:
    cam = tick.cameras[camera_id]
    K = scenario.camera(camera_id).intrinsics
    cylinders = frame_cylinders(scenario, tick, exclude=_carrier(scenario, camera_id))
    return render_instance_mask(cylinders, scenario.obstacles, cam, K, raster)


def mask_filename(scenario: str, camera_id: str, frame: int) -> str:
    return f"{scenario}_{camera_id}_{frame:06d}.pgm"

