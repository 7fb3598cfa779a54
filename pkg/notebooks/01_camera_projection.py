# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Camera projection and pedestrian boxes
#
# World coordinates are north-east-down: a pedestrian standing on the ground has
# `z = 0` at the feet and `z = -height` at the top of the head. Cameras are
# described by a pose and a pinhole model with square pixels.

# %%
import math

import numpy as np

from pedsim.annotation import project_pedestrian
from pedsim.geometry import CameraIntrinsics, Pose, look_at_quaternion, project_points, world_to_camera

K = CameraIntrinsics(1920, 1080, math.radians(90))
print(f"fx={K.fx} fy={K.fy} principal point=({K.cx}, {K.cy})")

# %% [markdown]
# A level camera at eye height, looking north. A point straight ahead lands on
# the principal point; a point to the east lands to the right of it.

# %%
cam = Pose((0.0, 0.0, -0.9))
points = np.array([[10.0, 0.0, -0.9], [10.0, 2.0, -0.9], [10.0, 0.0, 0.0]])
uv, in_front = project_points(world_to_camera(points, cam), K)
print(np.round(uv, 2), in_front)

# %% [markdown]
# Pedestrians are vertical cylinders. The box hugs the silhouette generators
# (the two vertical lines tangent to the cylinder as seen from the camera), so
# its width shrinks with distance like `2 r fx / d`.

# %%
for d in (3.0, 10.0, 30.0):
    box = project_pedestrian((d, 0.0, 0.0), 0.3, 1.8, cam, K).bbox
    print(f"d={d:5.1f} m  width={box.width:7.2f} px  height={box.height:7.2f} px  ~2rf/d={2 * 0.3 * K.fx / d:7.2f}")

# %% [markdown]
# Tilted cameras are built with `look_at_quaternion`. Boxes that leave the
# image are clipped and flagged as truncated.

# %%
tilted = Pose((0.0, 0.0, -6.0), look_at_quaternion((0.0, 0.0, -6.0), (12.0, 0.0, 0.0)))
for east in (0.0, 8.0, 14.0):
    proj = project_pedestrian((12.0, east, 0.0), 0.3, 1.75, tilted, K)
    print(east, None if proj.bbox is None else np.round(proj.bbox.as_list(), 1), proj.truncated)
