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
# # Synthetic detections under fog and at night
#
# Each profile sets how detection probability falls off with distance and
# visibility, how much the boxes jitter, and how many false positives appear.

# %%
import dataclasses

from pedsim.annotation import annotation_file
from pedsim.perception import PROFILES, DetectorModel, detection_probability, dumps_detections, synthesize_detections
from pedsim.scenario import load_scenario
from pedsim.simulation import run_simulation

for name, spec in PROFILES.items():
    print(f"{name:10s}", spec)

# %% [markdown]
# Detection probability for a fully visible pedestrian at a few distances.

# %%
for name in ("fog-light", "fog", "fog-dense", "night"):
    row = [detection_probability(PROFILES[name], 1.0, d) for d in (5.0, 15.0, 30.0)]
    print(f"{name:10s}", " ".join(f"{p:.3f}" for p in row))

# %% [markdown]
# The same ground truth, degraded by each profile with the same seed.

# %%
scn = dataclasses.replace(load_scenario("font_midday"), duration_frames=150)
ann = annotation_file(run_simulation(scn), scn, "cam0")
truth = sum(len(f.pedestrians) for f in ann.frames)
for name, spec in PROFILES.items():
    dets = synthesize_detections(ann.frames, DetectorModel(spec, seed=scn.seed))
    print(f"{name:10s} {len(dets):5d} detections for {truth} visible boxes")

print(dumps_detections(synthesize_detections(ann.frames[:1], DetectorModel(PROFILES["fog"], 1))))
