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
# # Ground-truth annotations, visibility and instance masks

# %%
import dataclasses
import math

import numpy as np

from pedsim.annotation import annotation_file, compute_visibility, default_raster, project_pedestrian, render_tick_mask
from pedsim.geometry import CameraIntrinsics, Pose
from pedsim.scenario import Obstacle, load_scenario
from pedsim.simulation import run_simulation

# %% [markdown]
# Visibility is the fraction of 34 surface samples with a clear line of sight.
# A wall covering the lower half of the body hides half of them.

# %%
K = CameraIntrinsics(1920, 1080, math.radians(90))
cam = Pose((0.0, 0.0, -0.9))
proj = project_pedestrian((10.0, 0.0, 0.0), 0.3, 1.8, cam, K)
for top in (-10.0, -0.9, 0.0):
    wall = Obstacle("wall", (5.0, -10.0, top), (5.2, 10.0, 0.0))
    print(f"wall top z={top:6.1f}: visibility {compute_visibility(proj, cam.position, (wall,)):.3f}")

# %% [markdown]
# Annotating a shortened run of a shipped scenario. Pedestrians that are fully
# hidden or outside the frustum are left out of a frame.

# %%
scn = dataclasses.replace(load_scenario("street_night"), duration_frames=60)
trace = run_simulation(scn)
ann = annotation_file(trace, scn, "cam0")
frame = ann.frames[-1]
for p in frame.pedestrians:
    print(p.id, p.name, np.round(p.bbox.as_list(), 1), f"vis={p.visibility:.2f}")

# %% [markdown]
# Instance masks are rendered at a quarter of the camera resolution; pixel
# values are pedestrian ids and 0 is background.

# %%
mask = render_tick_mask(trace.ticks[-1], scn, "cam0", default_raster(scn.cameras[0].intrinsics))
ids, counts = np.unique(mask.labels, return_counts=True)
print(mask.labels.shape, dict(zip(ids.tolist(), counts.tolist())))
print(ann.to_json()[:300])
