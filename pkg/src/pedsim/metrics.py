"""CLEAR MOT and identity (IDF1) metrics.

Both metric families consume *frame boxes*: a mapping ``frame -> [(id, BBox2D), ...]``.
Helpers convert annotation files and track sets into that form.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .assignment import hungarian
from .boxes import BBox2D, iou_matrix

FrameBoxes = dict[int, list[tuple[int, BBox2D]]]


class EvaluationError(ValueError):
    """Raised when a metric is undefined, e.g. no ground-truth boxes at all."""


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = 0.5
    visibility_floor: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold={self.iou_threshold} outside (0, 1]")
        if not 0.0 <= self.visibility_floor < 1.0:
            raise ValueError(f"visibility_floor={self.visibility_floor} outside [0, 1)")


def gt_from_annotations(frames, visibility_floor: float = 0.0) -> FrameBoxes:
    """Ground-truth frame boxes from FrameAnnotations, dropping entries below the floor."""
    out: FrameBoxes = {}
    for f in frames:
        out[f.frame_index] = [
            (p.id, p.bbox) for p in f.pedestrians if p.bbox is not None and p.visibility >= visibility_floor
        ]
    return out


def _boxes_array(entries) -> np.ndarray:
    return np.array([b.as_list() for _, b in entries], dtype=float).reshape(-1, 4)


@dataclass
class FrameLog:
    frame: int
    n_gt: int
    n_hyp: int
    matches: int
    fp: int
    fn: int
    idsw: int


@dataclass(frozen=True)
class ClearMotResult:
    mota: float
    motp: float
    fp: int
    fn: int
    idsw: int
    gt_count: int
    match_count: int
    per_frame: tuple[FrameLog, ...] = ()


def _frames(gt: FrameBoxes, hyp: FrameBoxes) -> list[int]:
    return sorted(set(gt) | set(hyp))


def clear_mot(gt: FrameBoxes, hyp: FrameBoxes, cfg: EvalConfig = EvalConfig()) -> ClearMotResult:
    """Per-frame persistent matching, then optimal assignment of what is left."""
    thr = cfg.iou_threshold
    last_match: dict[int, int] = {}  # gt id -> hyp id of its most recent match
    last_owner: dict[int, int] = {}  # hyp id -> gt id of its most recent match
    fp = fn = idsw = matches = 0
    iou_sum = 0.0
    logs = []
    gt_count = sum(len(v) for v in gt.values())
    if gt_count == 0:
        raise EvaluationError("MOTA is undefined without ground-truth boxes")
    for frame in _frames(gt, hyp):
        g = gt.get(frame, [])
        h = hyp.get(frame, [])
        ious = iou_matrix(_boxes_array(g), _boxes_array(h))
        g_ids = [i for i, _ in g]
        h_ids = [i for i, _ in h]
        h_index = {hid: j for j, hid in enumerate(h_ids)}
        pairs: list[tuple[int, int]] = []
        for gi, gid in enumerate(g_ids):
            hid = last_match.get(gid)
            hj = h_index.get(hid) if hid is not None and last_owner.get(hid) == gid else None
            if hj is not None and ious[gi, hj] >= thr:
                pairs.append((gi, hj))
        taken_g = {p[0] for p in pairs}
        taken_h = {p[1] for p in pairs}
        free_g = [i for i in range(len(g)) if i not in taken_g]
        free_h = [j for j in range(len(h)) if j not in taken_h]
        if free_g and free_h:
            sub = ious[np.ix_(free_g, free_h)]
            cost = np.where(sub >= thr, 1.0 - sub, np.inf)
            pairs += [(free_g[a], free_h[b]) for a, b in hungarian(cost)]
        frame_sw = 0
        for gi, hj in pairs:
            gid, hid = g_ids[gi], h_ids[hj]
            if gid in last_match and last_match[gid] != hid:
                frame_sw += 1
            last_match[gid] = hid
            last_owner[hid] = gid
            iou_sum += ious[gi, hj]
        m = len(pairs)
        logs.append(FrameLog(frame, len(g), len(h), m, len(h) - m, len(g) - m, frame_sw))
        matches += m
        fp += len(h) - m
        fn += len(g) - m
        idsw += frame_sw
    mota = 1.0 - (fn + fp + idsw) / gt_count
    motp = iou_sum / matches if matches else 0.0
    return ClearMotResult(mota, motp, fp, fn, idsw, gt_count, matches, tuple(logs))


@dataclass(frozen=True)
class IdentityResult:
    idf1: float
    idp: float
    idr: float
    idtp: int
    idfp: int
    idfn: int


def _trajectories(boxes: FrameBoxes) -> dict[int, dict[int, BBox2D]]:
    out: dict[int, dict[int, BBox2D]] = defaultdict(dict)
    for frame, entries in boxes.items():
        for tid, b in entries:
            out[tid][frame] = b
    return dict(out)


def overlap_counts(gt: FrameBoxes, hyp: FrameBoxes, thr: float):
    """Frames where each (gt trajectory, hyp trajectory) pair agrees at IoU >= thr.

    Returns ``(gt_ids, hyp_ids, counts, gt_lengths, hyp_lengths)``.
    """
    g_tr = _trajectories(gt)
    h_tr = _trajectories(hyp)
    g_ids, h_ids = sorted(g_tr), sorted(h_tr)
    gi = {t: i for i, t in enumerate(g_ids)}
    hi = {t: i for i, t in enumerate(h_ids)}
    counts = np.zeros((len(g_ids), len(h_ids)), dtype=np.int64)
    for frame in _frames(gt, hyp):
        g, h = gt.get(frame, []), hyp.get(frame, [])
        if not g or not h:
            continue
        ok = iou_matrix(_boxes_array(g), _boxes_array(h)) >= thr
        for a, b in zip(*np.nonzero(ok)):
            counts[gi[g[a][0]], hi[h[b][0]]] += 1
    g_len = np.array([len(g_tr[t]) for t in g_ids], dtype=np.int64)
    h_len = np.array([len(h_tr[t]) for t in h_ids], dtype=np.int64)
    return g_ids, h_ids, counts, g_len, h_len


def identity_cost_matrix(counts, g_len, h_len) -> np.ndarray:
    """Padded ``(G+H) x (H+G)`` cost matrix: real pairs, per-trajectory dummies, dummy-dummy zeros."""
    G, H = len(g_len), len(h_len)
    c = np.full((G + H, H + G), np.inf)
    c[:G, :H] = (g_len[:, None] - counts) + (h_len[None, :] - counts)
    for i in range(G):
        c[i, H + i] = g_len[i]  # gt trajectory left unmatched: all its frames are misses
    for j in range(H):
        c[G + j, j] = h_len[j]  # hyp trajectory left unmatched: all its frames are false
    c[G:, H:] = 0.0
    return c


def identity_metrics(gt: FrameBoxes, hyp: FrameBoxes, cfg: EvalConfig = EvalConfig()) -> IdentityResult:
    """Global one-to-one trajectory matching that minimizes identity errors."""
    g_ids, h_ids, counts, g_len, h_len = overlap_counts(gt, hyp, cfg.iou_threshold)
    total_gt, total_hyp = int(g_len.sum()), int(h_len.sum())
    if total_gt == 0:
        raise EvaluationError("identity metrics are undefined without ground-truth boxes")
    idtp = 0
    if g_ids and h_ids:
        pairs = hungarian(identity_cost_matrix(counts, g_len, h_len))
        idtp = int(sum(counts[i, j] for i, j in pairs if i < len(g_ids) and j < len(h_ids)))
    idfn = total_gt - idtp
    idfp = total_hyp - idtp
    idp = idtp / total_hyp if total_hyp else 0.0
    idr = idtp / total_gt
    idf1 = 2 * idtp / (2 * idtp + idfp + idfn)
    return IdentityResult(idf1, idp, idr, idtp, idfp, idfn)


@dataclass(frozen=True)
class EvalReport:
    mota: float
    motp: float
    idf1: float
    idp: float
    idr: float
    fp: int
    fn: int
    idsw: int
    gt_count: int
    match_count: int
    frames: int
    per_frame: tuple[FrameLog, ...] = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "mota": self.mota,
            "motp": self.motp,
            "idf1": self.idf1,
            "idp": self.idp,
            "idr": self.idr,
            "fp": self.fp,
            "fn": self.fn,
            "idsw": self.idsw,
            "gt": self.gt_count,
            "frames": self.frames,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table(self, name: str = "sequence") -> str:
        cols = ["MOTA", "MOTP", "IDF1", "IDP", "IDR", "FP", "FN", "IDs", "GT", "Frames"]
        vals = [
            f"{100 * self.mota:.1f}",
            f"{100 * self.motp:.1f}",
            f"{100 * self.idf1:.1f}",
            f"{100 * self.idp:.1f}",
            f"{100 * self.idr:.1f}",
            str(self.fp),
            str(self.fn),
            str(self.idsw),
            str(self.gt_count),
            str(self.frames),
        ]
        width = max(len(name), len("Dataset"))
        widths = [max(len(c), len(v)) for c, v in zip(cols, vals)]
        head = "Dataset".ljust(width) + "  " + "  ".join(c.rjust(w) for c, w in zip(cols, widths))
        row = name.ljust(width) + "  " + "  ".join(v.rjust(w) for v, w in zip(vals, widths))
        return head + "\n" + row + "\n"


def eval_report(gt: FrameBoxes, hyp: FrameBoxes, cfg: EvalConfig = EvalConfig()) -> EvalReport:
    cm = clear_mot(gt, hyp, cfg)
    ident = identity_metrics(gt, hyp, cfg)
    return EvalReport(
        mota=cm.mota,
        motp=cm.motp,
        idf1=ident.idf1,
        idp=ident.idp,
        idr=ident.idr,
        fp=cm.fp,
        fn=cm.fn,
        idsw=cm.idsw,
        gt_count=cm.gt_count,
        match_count=cm.match_count,
        frames=len(cm.per_frame),
        per_frame=cm.per_frame,
    )
