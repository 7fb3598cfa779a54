"""Synthetic detector with weather and lighting degradation, plus MOT text I/O.

A ground-truth box is detected with probability::

    p = base_detect_prob * night_factor * visibility**visibility_exponent * exp(-fog_extinction * distance_m)

clamped to [0, 1]. Detected boxes get zero-mean Gaussian corner jitter with
standard deviation ``bbox_noise_sigma`` times the box width (x) or height (y).
False positives arrive as Poisson(``false_positive_rate``) per frame with
log-uniform heights in [16, 256] px and a 0.4 width/height aspect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boxes import BBox2D
from .scenario import DegradationSpec
from .simulation import entity_rng

FP_MIN_HEIGHT = 16.0
FP_MAX_HEIGHT = 256.0
FP_ASPECT = 0.4

#: Named degradation profiles. ``clear`` is the identity degradation.
PROFILES: dict[str, DegradationSpec] = {
    "clear": DegradationSpec(),
    "fog-light": DegradationSpec(
        fog_extinction=0.02, base_detect_prob=0.97, bbox_noise_sigma=0.03, false_positive_rate=0.1, visibility_exponent=1.0
    ),
    "fog": DegradationSpec(
        fog_extinction=0.05, base_detect_prob=0.95, bbox_noise_sigma=0.04, false_positive_rate=0.2, visibility_exponent=1.0
    ),
    "fog-dense": DegradationSpec(
        fog_extinction=0.10, base_detect_prob=0.95, bbox_noise_sigma=0.05, false_positive_rate=0.3, visibility_exponent=1.0
    ),
    "night": DegradationSpec(
        base_detect_prob=0.97, night_factor=0.6, bbox_noise_sigma=0.05, false_positive_rate=0.3, visibility_exponent=1.5
    ),
}


@dataclass(frozen=True)
class Detection:
    frame_index: int
    bbox: BBox2D
    score: float = 1.0


@dataclass(frozen=True)
class TrackEntry:
    frame_index: int
    track_id: int
    bbox: BBox2D
    score: float = 1.0


@dataclass(frozen=True)
class DetectorModel:
    degradation: DegradationSpec
    seed: int = 0


def detection_probability(spec: DegradationSpec, visibility: float, distance_m: float) -> float:
    if spec.fog_extinction == math.inf:
        fog = 0.0 if distance_m > 0 else 1.0
    else:
        fog = math.exp(-spec.fog_extinction * distance_m)
    p = spec.base_detect_prob * spec.night_factor * visibility**spec.visibility_exponent * fog
    return min(max(p, 0.0), 1.0)


def _jitter(bbox: BBox2D, sigma: float, rng: np.random.Generator, width: int, height: int) -> BBox2D:
    if sigma <= 0:
        return bbox
    n = rng.normal(0.0, 1.0, 4)
    x0 = bbox.x_min + n[0] * sigma * bbox.width
    y0 = bbox.y_min + n[1] * sigma * bbox.height
    x1 = bbox.x_max + n[2] * sigma * bbox.width
    y1 = bbox.y_max + n[3] * sigma * bbox.height
    return BBox2D(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1)).clamp(width, height)


def _false_positives(rate: float, rng: np.random.Generator, width: int, height: int) -> list[BBox2D]:
    out = []
    for _ in range(int(rng.poisson(rate)) if rate > 0 else 0):
        h = math.exp(rng.uniform(math.log(FP_MIN_HEIGHT), math.log(FP_MAX_HEIGHT)))
        w = FP_ASPECT * h
        x = rng.uniform(0.0, max(width - w, 0.0))
        y = rng.uniform(0.0, max(height - h, 0.0))
        out.append(BBox2D(x, y, x + w, y + h).clamp(width, height))
    return out


def synthesize_detections(frames, model: DetectorModel) -> list[Detection]:
    """Degraded detector output for a sequence of FrameAnnotations.

    Each frame draws from its own stream keyed by ``(seed, frame_index)``, so
    results do not depend on which other frames are processed.
    """
    spec = model.degradation
    out: list[Detection] = []
    for f in frames:
        rng = entity_rng(model.seed, "detector", f.frame_index)
        W, H = f.intrinsics.width_px, f.intrinsics.height_px
        for ped in f.pedestrians:
            if ped.bbox is None:
                continue
            p = detection_probability(spec, ped.visibility, ped.distance_m)
            if rng.random() >= p:
                continue
            out.append(Detection(f.frame_index, _jitter(ped.bbox, spec.bbox_noise_sigma, rng, W, H), p))
        for box in _false_positives(spec.false_positive_rate, rng, W, H):
            out.append(Detection(f.frame_index, box, float(rng.uniform(0.0, 0.5))))
    return out


# -- MOT text format ------------------------------------------------------------------------


class MotFormatError(ValueError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def format_mot_line(frame_index: int, obj_id: int, bbox: BBox2D, score: float) -> str:
    return (
        f"{frame_index + 1},{obj_id},{bbox.x_min:.2f},{bbox.y_min:.2f},"
        f"{bbox.width:.2f},{bbox.height:.2f},{score:.4f},-1,-1,-1"
    )


def _dump(rows) -> str:
    return "".join(line + "\n" for line in rows)


def dumps_detections(dets) -> str:
    return _dump(format_mot_line(d.frame_index, -1, d.bbox, d.score) for d in dets)


def dumps_tracks(entries) -> str:
    rows = sorted(entries, key=lambda e: (e.frame_index, e.track_id))
    return _dump(format_mot_line(e.frame_index, e.track_id, e.bbox, e.score) for e in rows)


def parse_mot(text: str) -> list[tuple[int, int, BBox2D, float]]:
    """Parse MOT lines into ``(frame_index (0-based), id, bbox, score)`` tuples."""
    rows = []
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) < 7:
            raise MotFormatError(n, f"expected at least 7 comma-separated fields, got {len(parts)}")
        try:
            frame = int(parts[0])
            obj = int(float(parts[1]))
            x, y, w, h, score = (float(v) for v in parts[2:7])
        except ValueError as exc:
            raise MotFormatError(n, str(exc)) from None
        if frame < 1:
            raise MotFormatError(n, f"frames are 1-based, got {frame}")
        if w < 0 or h < 0 or not all(math.isfinite(v) for v in (x, y, w, h, score)):
            raise MotFormatError(n, "box size must be finite and non-negative")
        rows.append((frame - 1, obj, BBox2D.from_xywh(x, y, w, h), score))
    return rows


def loads_detections(text: str) -> list[Detection]:
    return [Detection(f, b, s) for f, _, b, s in parse_mot(text)]


def loads_tracks(text: str) -> list[TrackEntry]:
    return [TrackEntry(f, i, b, s) for f, i, b, s in parse_mot(text)]


def read_detections(path) -> list[Detection]:
    return loads_detections(Path(path).read_text(encoding="utf-8"))


def read_tracks(path) -> list[TrackEntry]:
    return loads_tracks(Path(path).read_text(encoding="utf-8"))


def tracks_to_frames(entries) -> dict[int, list[tuple[int, BBox2D]]]:
    out: dict[int, list[tuple[int, BBox2D]]] = {}
    for e in entries:
        out.setdefault(e.frame_index, []).append((e.track_id, e.bbox))
    return out
