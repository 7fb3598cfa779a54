"""Coordinate frames, rigid poses and the pinhole camera model.

World frame is North-East-Down (NED) with the origin at the scenario origin.
Body frames follow the aerospace convention (x forward, y right, z down).
Camera optical frames use x right, y down, z forward; a single fixed rotation
(:data:`BODY_TO_OPTICAL`) maps body coordinates to optical coordinates.

Quaternions are stored as ``(w, x, y, z)`` tuples and rotate body vectors into
the world frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

Vec3 = tuple[float, float, float]

#: Points closer than this (meters, along the optical axis) do not project.
Z_NEAR = 0.01

#: optical = BODY_TO_OPTICAL @ body, i.e. (forward, right, down) -> (right, down, forward)
BODY_TO_OPTICAL = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])

IDENTITY_QUATERNION = (1.0, 0.0, 0.0, 0.0)


class BehindCamera(ValueError):
    """Raised when a point sits at or behind the near plane."""


def vec3(values) -> Vec3:
    x, y, z = (float(v) for v in values)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise ValueError(f"non-finite vector component in {(x, y, z)}")
    return (x, y, z)


# -- quaternion helpers ------------------------------------------------------


def quat_multiply(a, b) -> tuple[float, float, float, float]:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def quat_conjugate(q) -> tuple[float, float, float, float]:
    w, x, y, z = q
    return (w, -x, -y, -z)


def quat_normalize(q) -> tuple[float, float, float, float]:
    n = math.sqrt(sum(c * c for c in q))
    if n == 0.0 or not math.isfinite(n):
        raise ValueError("cannot normalize a zero or non-finite quaternion")
    w, x, y, z = (c / n for c in q)
    # canonical hemisphere keeps serialized poses stable
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    return (w, x, y, z)


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_euler(yaw: float, pitch: float = 0.0, roll: float = 0.0):
    """NED yaw-pitch-roll (intrinsic Z-Y-X) to quaternion."""
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    return quat_normalize(
        (
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        )
    )


def look_at_quaternion(eye, target) -> tuple[float, float, float, float]:
    """Orientation whose body x axis points from ``eye`` to ``target`` with zero roll."""
    d = np.asarray(target, dtype=float) - np.asarray(eye, dtype=float)
    horizontal = math.hypot(d[0], d[1])
    if horizontal == 0.0 and d[2] == 0.0:
        raise ValueError("look_at target coincides with the eye position")
    yaw = math.atan2(d[1], d[0]) if horizontal > 0.0 else 0.0
    pitch = math.atan2(-d[2], horizontal)
    return quat_from_euler(yaw, pitch)


# -- poses and transforms ------------------------------------------------------


@dataclass(frozen=True)
class Pose:
    """Rigid pose; ``quaternion`` rotates body vectors into the world frame."""

    position: Vec3 = (0.0, 0.0, 0.0)
    quaternion: tuple[float, float, float, float] = IDENTITY_QUATERNION

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        q = tuple(float(c) for c in self.quaternion)
        if len(q) != 4 or abs(math.sqrt(sum(c * c for c in q)) - 1.0) > 1e-9:
            raise ValueError(f"quaternion {q} is not unit length")
        object.__setattr__(self, "quaternion", q)

    @property
    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)

    def compose(self, other: Pose) -> Pose:
        """``self * other``: ``other`` is expressed in the frame of ``self``."""
        p = np.asarray(self.position) + self.rotation @ np.asarray(other.position)
        return Pose(tuple(p), quat_multiply(self.quaternion, other.quaternion))

    def inverse(self) -> Pose:
        q = quat_conjugate(self.quaternion)
        p = -(quat_to_matrix(q) @ np.asarray(self.position))
        return Pose(tuple(p), q)

    def to_dict(self) -> dict:
        return {"position": list(self.position), "quaternion": list(self.quaternion)}

    @classmethod
    def from_dict(cls, d: dict) -> Pose:
        return cls(tuple(d["position"]), tuple(d["quaternion"]))


@dataclass(frozen=True)
class FrameTransform:
    """Tagged rigid transform mapping coordinates in ``source`` to ``target``."""

    rotation: tuple[float, float, float, float]
    translation: Vec3
    source: str
    target: str

    def apply(self, p) -> np.ndarray:
        return quat_to_matrix(self.rotation) @ np.asarray(p, dtype=float) + np.asarray(self.translation)

    def inverse(self) -> FrameTransform:
        q = quat_conjugate(self.rotation)
        t = -(quat_to_matrix(q) @ np.asarray(self.translation))
        return FrameTransform(q, tuple(t), self.target, self.source)

    def compose(self, inner: FrameTransform) -> FrameTransform:
        """Apply ``inner`` first, then ``self``."""
        if inner.target != self.source:
            raise ValueError(f"cannot chain {inner.source}->{inner.target} into {self.source}->{self.target}")
        q = quat_normalize(quat_multiply(self.rotation, inner.rotation))
        return FrameTransform(q, tuple(self.apply(inner.translation)), inner.source, self.target)

    @classmethod
    def from_pose(cls, pose: Pose, body: str, world: str = "world") -> FrameTransform:
        return cls(pose.quaternion, pose.position, body, world)


# -- camera model ----------------------------------------------------------------


@dataclass(frozen=True)
class CameraIntrinsics:
    width_px: int
    height_px: int
    hfov_rad: float
    fx: float = field(init=False)
    fy: float = field(init=False)
    cx: float = field(init=False)
    cy: float = field(init=False)

    def __post_init__(self):
        if int(self.width_px) <= 0 or int(self.height_px) <= 0:
            raise ValueError("image dimensions must be positive")
        if not 0.0 < self.hfov_rad < math.pi:
            raise ValueError(f"hfov_rad={self.hfov_rad} outside (0, pi)")
        fx = self.width_px / (2.0 * math.tan(self.hfov_rad / 2.0))
        # snap away the last-ulp noise of tan() so round angles give round focal lengths
        fx = float(f"{fx:.12g}")
        object.__setattr__(self, "fx", fx)
        object.__setattr__(self, "fy", fx)
        object.__setattr__(self, "cx", self.width_px / 2.0)
        object.__setattr__(self, "cy", self.height_px / 2.0)

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def to_dict(self) -> dict:
        return {
            "width": self.width_px,
            "height": self.height_px,
            "hfov_rad": self.hfov_rad,
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
        }


def world_to_camera(p, cam_pose: Pose) -> np.ndarray:
    """Express world point(s) ``p`` (shape ``(3,)`` or ``(N, 3)``) in the optical frame."""
    p = np.asarray(p, dtype=float)
    world_to_body = cam_pose.rotation.T
    body = (p - np.asarray(cam_pose.position)) @ world_to_body.T
    return body @ BODY_TO_OPTICAL.T


def camera_to_world(p_cam, cam_pose: Pose) -> np.ndarray:
    p_cam = np.asarray(p_cam, dtype=float)
    body = p_cam @ BODY_TO_OPTICAL
    return body @ cam_pose.rotation.T + np.asarray(cam_pose.position)


def project(p_cam, K: CameraIntrinsics, z_near: float = Z_NEAR) -> tuple[float, float]:
    """Pinhole projection of a single optical-frame point; may land outside the image."""
    x, y, z = (float(c) for c in p_cam)
    if z <= z_near:
        raise BehindCamera(f"depth {z} <= z_near {z_near}")
    return (K.fx * x / z + K.cx, K.fy * y / z + K.cy)


def project_points(p_cam, K: CameraIntrinsics, z_near: float = Z_NEAR):
    """Vectorized :func:`project`. Returns ``(uv, in_front)``; rows behind the camera are NaN."""
    p_cam = np.atleast_2d(np.asarray(p_cam, dtype=float))
    z = p_cam[:, 2]
    in_front = z > z_near
    uv = np.full((len(p_cam), 2), np.nan)
    zf = z[in_front]
    uv[in_front, 0] = K.fx * p_cam[in_front, 0] / zf + K.cx
    uv[in_front, 1] = K.fy * p_cam[in_front, 1] / zf + K.cy
    return uv, in_front


def relative_to_initial(current: Pose, initial: Pose) -> Pose:
    """Pose of ``current`` in the frame anchored at ``initial``."""
    q_inv = quat_conjugate(initial.quaternion)
    p = quat_to_matrix(q_inv) @ (np.asarray(current.position) - np.asarray(initial.position))
    return Pose(tuple(p), quat_multiply(q_inv, current.quaternion))
