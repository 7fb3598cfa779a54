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
# # Trackers, optimal assignment and CLEAR / identity metrics

# %%
import dataclasses

import numpy as np

from pedsim.annotation import annotation_file
from pedsim.assignment import assignment_cost, hungarian
from pedsim.metrics import clear_mot, eval_report, gt_from_annotations
from pedsim.perception import PROFILES, DetectorModel, synthesize_detections, tracks_to_frames
from pedsim.scenario import load_scenario
from pedsim.simulation import run_simulation
from pedsim.trackers import KalmanParams, track_iou, track_kalman

# %% [markdown]
# The assignment solver handles rectangular matrices and forbidden pairs (`inf`).

# %%
cost = np.array([[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, np.inf]])
pairs = hungarian(cost)
print(pairs, assignment_cost(cost, pairs))

# %% [markdown]
# A tiny hand example: one miss and one stray box over ten ground-truth boxes.

# %%
from pedsim.boxes import BBox2D  # noqa: E402

box = lambda x: BBox2D(x, 0.0, x + 10.0, 20.0)  # noqa: E731
gt = {f: [(1, box(0)), (2, box(200))] for f in range(5)}
hyp = {f: [(11, box(0))] + ([(12, box(200))] if f != 3 else []) for f in range(5)}
hyp[1].append((13, box(500)))
r = clear_mot(gt, hyp)
print(f"FN={r.fn} FP={r.fp} IDSW={r.idsw} MOTA={r.mota:.2f}")

# %% [markdown]
# Both baseline trackers on foggy detections of a short run.

# %%
scn = dataclasses.replace(load_scenario("street_day"), duration_frames=200)
ann = annotation_file(run_simulation(scn), scn, "cam0")
dets = synthesize_detections(ann.frames, DetectorModel(PROFILES["fog-light"], seed=4))
truth = gt_from_annotations(ann.frames)
for label, tracks in (("iou", track_iou(dets)), ("kalman", track_kalman(dets, KalmanParams()))):
    print(eval_report(truth, tracks_to_frames(tracks)).table(label), end="")
