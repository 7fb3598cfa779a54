"""Baseline multi-object trackers: greedy IoU linking and a constant-velocity Kalman tracker.

Both trackers relabel detections; they never emit a box that was not detected
in that frame (unless ``emit_predictions`` is switched on for the Kalman
tracker). A track is reported only once it has collected ``min_hits``
consecutive hits, starting from the frame where that happens, and track ids
are handed out in order of confirmation.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .assignment import hungarian
from .boxes import BBox2D, iou_matrix
from .perception import Detection, TrackEntry


def _by_frame(detections) -> dict[int, list[Detection]]:
    frames: dict[int, list[Detection]] = defaultdict(list)
    for d in detections:
        frames[d.frame_index].append(d)
    return frames


class _Lifecycle:
    """Confirmation bookkeeping shared by both trackers."""

    def __init__(self, min_hits: int):
        self.min_hits = min_hits
        self.next_id = 1
        self.entries: list[TrackEntry] = []

    def hit(self, track, frame: int, det: Detection):
        track.streak = track.streak + 1 if track.last_hit == frame - 1 else 1
        track.last_hit = frame
        if track.track_id is None and track.streak >= self.min_hits:
            track.track_id = self.next_id
            self.next_id += 1
        if track.track_id is not None:
            self.entries.append(TrackEntry(frame, track.track_id, det.bbox, det.score))


@dataclass
class _IouTrack:
    box: BBox2D
    last_hit: int
    streak: int = 0
    track_id: int | None = None


def track_iou(detections, iou_min: float = 0.3, max_age: int = 10, min_hits: int = 2) -> list[TrackEntry]:
    """Greedy frame-to-frame linking on the highest remaining IoU."""
    life = _Lifecycle(min_hits)
    tracks: list[_IouTrack] = []
    frames = _by_frame(detections)
    for frame in sorted(frames):
        dets = frames[frame]
        tracks = [t for t in tracks if frame - t.last_hit <= max_age]
        ious = iou_matrix([t.box.as_list() for t in tracks], [d.bbox.as_list() for d in dets])
        matched_t, matched_d = set(), set()
        if ious.size:
            order = np.argsort(-ious, axis=None, kind="stable")
            for flat in order:
                ti, di = divmod(int(flat), len(dets))
                if ious[ti, di] < iou_min:
                    break
                if ti in matched_t or di in matched_d:
                    continue
                matched_t.add(ti)
                matched_d.add(di)
                tracks[ti].box = dets[di].bbox
                life.hit(tracks[ti], frame, dets[di])
        for di, d in enumerate(dets):
            if di not in matched_d:
                t = _IouTrack(d.bbox, last_hit=frame - 2)
                tracks.append(t)
                life.hit(t, frame, d)
    return life.entries


# -- Kalman tracker ------------------------------------------------------------------------


def box_to_z(b: BBox2D) -> np.ndarray:
    w, h = b.width, b.height
    return np.array([b.x_min + w / 2, b.y_min + h / 2, w * h, w / h if h > 0 else 1.0])


def x_to_box(x: np.ndarray) -> BBox2D:
    s, r = max(float(x[2]), 1e-9), max(float(x[3]), 1e-9)
    w = np.sqrt(s * r)
    h = s / w
    return BBox2D(float(x[0] - w / 2), float(x[1] - h / 2), float(x[0] + w / 2), float(x[1] + h / 2))


@dataclass
class KalmanParams:
    iou_min: float = 0.3
    max_age: int = 30
    min_hits: int = 3
    process_noise: float = 1.0
    measurement_noise: float = 1.0
    emit_predictions: bool = False


_F = np.eye(7)
_F[0, 4] = _F[1, 5] = _F[2, 6] = 1.0
_H = np.eye(4, 7)


@dataclass
class _KalmanTrack:
    x: np.ndarray
    P: np.ndarray
    last_hit: int
    streak: int = 0
    track_id: int | None = None
    misses: int = 0
    Q: np.ndarray = field(default=None, repr=False)
    R: np.ndarray = field(default=None, repr=False)

    @classmethod
    def start(cls, det: Detection, frame: int, params: KalmanParams) -> _KalmanTrack:
        x = np.zeros(7)
        x[:4] = box_to_z(det.bbox)
        P = np.eye(7) * 10.0
        P[4:, 4:] *= 1000.0  # unobserved velocities start very uncertain
        Q = np.eye(7) * params.process_noise
        Q[-1, -1] *= 0.01
        Q[4:, 4:] *= 0.01
        R = np.eye(4) * params.measurement_noise
        R[2:, 2:] *= 10.0
        return cls(x, P, last_hit=frame - 2, Q=Q, R=R)

    def predict(self) -> BBox2D:
        if self.x[2] + self.x[6] <= 0:
            self.x[6] = 0.0
        self.x = _F @ self.x
        self.P = _F @ self.P @ _F.T + self.Q
        self.misses += 1
        return x_to_box(self.x)

    def update(self, z: np.ndarray):
        y = z - _H @ self.x
        S = _H @ self.P @ _H.T + self.R
        K = np.linalg.solve(S, _H @ self.P).T
        self.x = self.x + K @ y
        self.P = (np.eye(7) - K @ _H) @ self.P
        self.misses = 0


def track_kalman(detections, params: KalmanParams | None = None) -> list[TrackEntry]:
    """Constant-velocity Kalman tracks associated by optimal assignment on ``1 - IoU``."""
    params = params or KalmanParams()
    life = _Lifecycle(params.min_hits)
    frames = _by_frame(detections)
    if not frames:
        return []
    tracks: list[_KalmanTrack] = []
    for frame in range(min(frames), max(frames) + 1):
        dets = frames.get(frame, [])
        predicted = [t.predict() for t in tracks]
        ious = iou_matrix([b.as_list() for b in predicted], [d.bbox.as_list() for d in dets])
        pairs = []
        if ious.size:
            cost = np.where(ious >= params.iou_min, 1.0 - ious, np.inf)
            pairs = hungarian(cost)
        matched_d = set()
        for ti, di in pairs:
            tracks[ti].update(box_to_z(dets[di].bbox))
            life.hit(tracks[ti], frame, dets[di])
            matched_d.add(di)
        if params.emit_predictions:
            matched_t = {ti for ti, _ in pairs}
            for ti, t in enumerate(tracks):
                if ti not in matched_t and t.track_id is not None and t.misses <= params.max_age:
                    life.entries.append(TrackEntry(frame, t.track_id, predicted[ti], 0.0))
        for di, d in enumerate(dets):
            if di not in matched_d:
                t = _KalmanTrack.start(d, frame, params)
                tracks.append(t)
                life.hit(t, frame, d)
        tracks = [t for t in tracks if t.misses <= params.max_age]
    return life.entries
