import dataclasses
import math

import numpy as np
import pytest
from conftest import shipped
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import detection_probability_by_hand

from pedsim.boxes import BBox2D
from pedsim.perception import (
    PROFILES,
    Detection,
    DetectorModel,
    MotFormatError,
    TrackEntry,
    detection_probability,
    dumps_detections,
    dumps_tracks,
    loads_detections,
    loads_tracks,
    synthesize_detections,
)
from pedsim.scenario import DegradationSpec

CLEAR = DegradationSpec()


def test_clear_profile_is_identity_degradation():
    assert PROFILES["clear"] == CLEAR
    assert (CLEAR.fog_extinction, CLEAR.base_detect_prob, CLEAR.night_factor) == (0.0, 1.0, 1.0)
    assert (CLEAR.bbox_noise_sigma, CLEAR.false_positive_rate, CLEAR.visibility_exponent) == (0.0, 0.0, 0.0)


def test_probability_hand_example():
    spec = DegradationSpec(fog_extinction=0.02, base_detect_prob=0.9)
    exact = math.log(2) / 0.02  # 34.657... m halves the fog term
    assert abs(detection_probability(spec, 1.0, exact) - 0.45) < 1e-6
    assert detection_probability(spec, 1.0, 34.66) == pytest.approx(
        detection_probability_by_hand(0.9, 1.0, 1.0, 0.0, 0.02, 34.66), abs=1e-15
    )


def test_infinite_fog_kills_detections():
    spec = DegradationSpec(fog_extinction=math.inf)
    _, _, ann = shipped("street_day")
    assert synthesize_detections(ann.frames[:50], DetectorModel(spec, 1)) == []


def test_clear_is_lossless_bit_exact():
    _, _, ann = shipped("street_day")
    dets = synthesize_detections(ann.frames, DetectorModel(CLEAR, 5))
    expected = [(f.frame_index, p.bbox) for f in ann.frames for p in f.pedestrians]
    assert [(d.frame_index, d.bbox) for d in dets] == expected


def test_fog_yields_fewer_detections():
    _, _, ann = shipped("font_fog")
    n_clear = len(synthesize_detections(ann.frames, DetectorModel(CLEAR, 3)))
    fog = dataclasses.replace(PROFILES["fog"], false_positive_rate=0.0)
    assert len(synthesize_detections(ann.frames, DetectorModel(fog, 3))) < n_clear


def test_deterministic_and_frame_local():
    _, _, ann = shipped("street_night")
    model = DetectorModel(PROFILES["night"], 9)
    full = synthesize_detections(ann.frames, model)
    assert full == synthesize_detections(ann.frames, model)
    part = synthesize_detections(ann.frames[100:120], model)
    assert part == [d for d in full if 100 <= d.frame_index < 120]


def test_detections_stay_inside_image():
    _, _, ann = shipped("font_moving")
    W, H = ann.intrinsics.width_px, ann.intrinsics.height_px
    spec = DegradationSpec(bbox_noise_sigma=0.3, false_positive_rate=3.0)
    for d in synthesize_detections(ann.frames, DetectorModel(spec, 2)):
        b = d.bbox
        assert 0 <= b.x_min <= b.x_max <= W and 0 <= b.y_min <= b.y_max <= H
        assert 0 <= d.score <= 1


unit = st.floats(0, 1)


@settings(max_examples=300)
@given(unit, unit, st.floats(0, 5), st.floats(0, 1), st.floats(0, 1), st.floats(0, 200), st.floats(0, 200))
def test_probability_monotone(base, vis, exponent, fog, fog2, dist, dist2):
    spec = DegradationSpec(fog_extinction=fog, base_detect_prob=base, visibility_exponent=exponent)
    p = detection_probability(spec, vis, dist)
    assert 0 <= p <= 1
    denser = dataclasses.replace(spec, fog_extinction=max(fog, fog2))
    assert detection_probability(denser, vis, dist) <= p
    assert detection_probability(spec, vis, max(dist, dist2)) <= p
    if exponent > 0:
        assert detection_probability(spec, vis * 0.5, dist) <= p


# -- MOT text ---------------------------------------------------------------------------------


def test_mot_line_layout():
    text = dumps_detections([Detection(0, BBox2D(1, 2, 11, 32), 0.5)])
    assert text == "1,-1,1.00,2.00,10.00,30.00,0.5000,-1,-1,-1\n"
    text = dumps_tracks([TrackEntry(4, 3, BBox2D(0, 0, 1, 1), 1.0)])
    assert text.startswith("5,3,")


def test_tracks_sorted_by_frame_then_id():
    entries = [TrackEntry(1, 2, BBox2D(0, 0, 1, 1)), TrackEntry(0, 5, BBox2D(0, 0, 1, 1)), TrackEntry(1, 1, BBox2D(0, 0, 1, 1))]
    rows = [tuple(line.split(",")[:2]) for line in dumps_tracks(entries).splitlines()]
    assert rows == [("1", "5"), ("2", "1"), ("2", "2")]


@pytest.mark.parametrize(
    "line,fragment",
    [("1,2,3", "at least 7"), ("0,-1,1,1,1,1,1", "1-based"), ("1,-1,a,1,1,1,1", "line 1"), ("1,-1,1,1,-5,1,1", "non-negative")],
)
def test_mot_errors_carry_line_numbers(line, fragment):
    with pytest.raises(MotFormatError) as exc:
        loads_detections("# header\n" * 0 + line + "\n")
    assert fragment in str(exc.value)
    with pytest.raises(MotFormatError) as exc:
        loads_tracks("1,1,0,0,1,1,1,-1,-1,-1\n" + line)
    assert exc.value.line_no == 2


def test_mot_round_trip_on_shipped_tracks():
    from pedsim.trackers import track_kalman

    _, _, ann = shipped("street_day")
    dets = synthesize_detections(ann.frames, DetectorModel(PROFILES["fog-light"], 4))
    text = dumps_detections(dets)
    assert dumps_detections(loads_detections(text)) == text
    ttext = dumps_tracks(track_kalman(dets))
    assert dumps_tracks(loads_tracks(ttext)) == ttext


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 10_000), st.integers(1, 999), st.floats(0, 5000), st.floats(0, 5000),
                          st.floats(0, 500), st.floats(0, 500), st.floats(0, 1)), max_size=30))  # fmt: skip
def test_mot_text_is_a_fixed_point_after_one_write(rows):
    entries = [TrackEntry(f, i, BBox2D.from_xywh(x, y, w, h), s) for f, i, x, y, w, h, s in rows]
    once = dumps_tracks(entries)
    assert dumps_tracks(loads_tracks(once)) == once


def test_false_positive_sizes():
    from pedsim.perception import _false_positives
    from pedsim.simulation import entity_rng

    boxes = _false_positives(200.0, entity_rng(1, "fp"), 1920, 1080)
    hs = np.array([b.height for b in boxes])
    assert len(boxes) > 100
    assert hs.min() >= 16 - 1e-9 and hs.max() <= 256 + 1e-9
    assert all(b.width == pytest.approx(0.4 * b.height) for b in boxes)
