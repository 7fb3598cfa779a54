"""Independent reference computations used to freeze expected values.

Nothing here imports the code under test: brute-force enumeration, closed forms
and plain-Python IoU.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_assignment_cost(cost) -> float:
    """Minimum total cost over all maximal one-to-one assignments of a finite matrix."""
    c = np.asarray(cost, dtype=float)
    n, m = c.shape
    if n == 0 or m == 0:
        return 0.0
    if n > m:
        c, n, m = c.T, m, n
    perms = np.array(list(itertools.permutations(range(m), n)))
    return float(c[np.arange(n), perms].sum(axis=1).min())


def brute_padded_cost(cost) -> float:
    """Minimum over every permutation of a square matrix (pad-completed inputs)."""
    c = np.asarray(cost, dtype=float)
    n = c.shape[0]
    best = math.inf
    for perm in itertools.permutations(range(n)):
        total = sum(c[i, perm[i]] for i in range(n))
        best = min(best, total)
    return best


def iou_xyxy(a, b) -> float:
    ix = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union if union > 0 else 0.0


def brute_identity(gt: dict, hyp: dict, thr: float = 0.5):
    """Best IDTP over all partial one-to-one trajectory matchings.

    ``gt``/``hyp`` map ``track id -> {frame: (x0, y0, x1, y1)}``. Returns
    ``(idtp, total_gt, total_hyp, min_cost)`` where ``min_cost`` counts the
    misses plus false positives of the best matching.
    """
    g_ids, h_ids = sorted(gt), sorted(hyp)
    agree = {}
    for g in g_ids:
        for h in h_ids:
            agree[g, h] = sum(
                1 for f, box in gt[g].items() if f in hyp[h] and iou_xyxy(box, hyp[h][f]) >= thr
            )
    total_g = sum(len(t) for t in gt.values())
    total_h = sum(len(t) for t in hyp.values())
    best = 0
    slots = h_ids + [None] * len(g_ids)
    seen = set()
    for choice in itertools.permutations(slots, len(g_ids)):
        if choice in seen:
            continue
        seen.add(choice)
        best = max(best, sum(agree[g, h] for g, h in zip(g_ids, choice) if h is not None))
    return best, total_g, total_h, total_g + total_h - 2 * best


def tangent_silhouette_u(d_north: float, d_east: float, radius: float, fx: float, cx: float):
    """Image columns of the two vertical silhouette edges of a cylinder seen by a level, north-facing camera."""
    rho = math.hypot(d_north, d_east)
    bearing = math.atan2(d_east, d_north)
    half = math.asin(radius / rho)
    return cx + fx * math.tan(bearing - half), cx + fx * math.tan(bearing + half)


def detection_probability_by_hand(base, night, visibility, exponent, fog, distance):
    return min(1.0, max(0.0, base * night * visibility**exponent * math.exp(-fog * distance)))
