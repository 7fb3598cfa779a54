import json

import pytest

from pedsim.cli import main
from pedsim.perception import PROFILES, read_detections, read_tracks
from pedsim.schemas import validate

# Three walkers in parallel lanes 4 m apart, pacing back and forth in front of
# a static camera. Nobody crosses or occludes anybody.
LANES = """format = 1
name = "lanes"
duration_frames = 120
fps = 30.0
seed = 21

[degradation]

[[paths]]
id = "lane_w"
vertices = [[8.0, -4.0, 0.0], [14.0, -4.0, 0.0]]
end_behavior = "reverse"

[[paths]]
id = "lane_c"
vertices = [[14.0, 0.0, 0.0], [8.0, 0.0, 0.0]]
end_behavior = "reverse"

[[paths]]
id = "lane_e"
vertices = [[9.0, 4.0, 0.0], [13.0, 4.0, 0.0]]
end_behavior = "reverse"

[[pedestrians]]
name = "west"
spawn = [8.0, -4.0, 0.0]
controller = "path"
path = "lane_w"

[[pedestrians]]
name = "centre"
spawn = [14.0, 0.0, 0.0]
controller = "path"
path = "lane_c"

[[pedestrians]]
name = "east"
spawn = [9.0, 4.0, 0.0]
controller = "path"
path = "lane_e"

[[cameras]]
id = "cam0"
width = 960
height = 540
hfov_deg = 90.0
mount = "static"
position = [0.0, 0.0, -2.0]
look_at = [11.0, 0.0, -0.9]
"""

BAD = """format = 1
name = "bad"
duration_frames = 0

[[pedestrians]]
name = "a"
spawn = [0.0, 0.0, 0.0]
controller = "path"
path = "nowhere"

[[pedestrians]]
name = "a"
spawn = [0.0, 0.0, 0.0]
controller = "random"
area = "void"
"""


@pytest.fixture()
def lanes(tmp_path):
    cfg = tmp_path / "lanes.cfg"
    cfg.write_text(LANES)
    return cfg


@pytest.fixture()
def simulated(tmp_path, lanes, monkeypatch):
    monkeypatch.delenv("PEDSIM_SEED", raising=False)
    out = tmp_path / "sim"
    assert main(["simulate", str(lanes), str(out)]) == 0
    return out / "lanes_cam0.json"


def test_simulate_shipped_is_byte_stable(tmp_path, monkeypatch):
    monkeypatch.delenv("PEDSIM_SEED", raising=False)
    assert main(["simulate", "street_day", str(tmp_path / "a")]) == 0
    assert main(["simulate", "street_day", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "street_day_cam0.json").read_bytes()
    assert a == (tmp_path / "b" / "street_day_cam0.json").read_bytes()
    assert len(json.loads(a)["frames"]) == 500


def test_simulate_creates_masks_and_trace(tmp_path, lanes):
    out = tmp_path / "deep" / "out"
    assert main(["simulate", str(lanes), str(out), "--masks", "--trace"]) == 0
    masks = sorted((out / "masks").glob("*.pgm"))
    assert len(masks) == 120
    assert masks[0].read_bytes().startswith(b"P5\n240 135\n")
    assert len(json.loads((out / "lanes_trace.json").read_text())["ticks"]) == 120


def test_invalid_scenario_lists_every_violation(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(BAD)
    assert main(["simulate", str(cfg), str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    for code in ("OutOfRange", "DanglingPath", "DuplicateName", "InsufficientGoals"):
        assert code in err
    assert not (tmp_path / "o").exists()


def test_syntax_error_exits_1(tmp_path, capsys):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text("format = 1\nname = [\n")
    assert main(["simulate", str(cfg), str(tmp_path)]) == 1
    assert "line" in capsys.readouterr().err


def test_missing_input_exits_2(tmp_path):
    assert main(["simulate", str(tmp_path / "nope.cfg"), str(tmp_path)]) == 2
    assert main(["track", str(tmp_path / "nope.txt")]) == 2


def test_usage_errors_exit_1(tmp_path):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["track", str(tmp_path / "d.txt"), "--tracker", "bogus"]) == 1


def test_unknown_camera_exits_1(tmp_path, lanes):
    assert main(["simulate", str(lanes), str(tmp_path), "--camera", "cam9"]) == 1


def test_seed_env_fallback(tmp_path, lanes, monkeypatch):
    monkeypatch.setenv("PEDSIM_SEED", "99")
    assert main(["simulate", str(lanes), str(tmp_path / "env")]) == 0
    assert json.loads((tmp_path / "env" / "lanes_cam0.json").read_text())["seed"] == 99
    assert main(["simulate", str(lanes), str(tmp_path / "cli"), "--seed", "5"]) == 0
    assert json.loads((tmp_path / "cli" / "lanes_cam0.json").read_text())["seed"] == 5
    monkeypatch.setenv("PEDSIM_SEED", "abc")
    assert main(["simulate", str(lanes), str(tmp_path / "x")]) == 1


def test_detect_profiles(tmp_path, simulated, capsys):
    assert main(["detect", str(simulated), "--profile", "murky"]) == 1
    err = capsys.readouterr().err
    assert all(name in err for name in PROFILES)
    assert main(["detect", str(simulated), "-o", str(tmp_path / "clear.txt")]) == 0
    assert main(["detect", str(simulated), "--profile", "fog-dense", "-o", str(tmp_path / "fog.txt")]) == 0
    clear = read_detections(tmp_path / "clear.txt")
    fog = read_detections(tmp_path / "fog.txt")
    assert len(fog) < len(clear) == 360


def test_detect_default_output_and_custom_profile(tmp_path, simulated):
    assert main(["detect", str(simulated)]) == 0
    assert simulated.with_name("lanes_cam0_det.txt").exists()
    prof = tmp_path / "haze.cfg"
    prof.write_text("format = 1\n\n[degradation]\nfog_extinction = 0.2\nbase_detect_prob = 0.9\n")
    assert main(["detect", str(simulated), "--profile", str(prof), "-o", str(tmp_path / "h.txt")]) == 0
    assert len(read_detections(tmp_path / "h.txt")) < 360


def test_track_edge_cases(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    assert main(["track", str(empty), "-o", str(tmp_path / "t.txt")]) == 0
    assert (tmp_path / "t.txt").read_text() == ""
    bad = tmp_path / "bad.txt"
    bad.write_text("1,-1,10,10,5,5,0.9,-1,-1,-1\n2,-1,10,oops,5,5,0.9,-1,-1,-1\n")
    assert main(["track", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_one_kalman_track_per_walker(tmp_path, simulated):
    assert main(["detect", str(simulated)]) == 0
    det = simulated.with_name("lanes_cam0_det.txt")
    assert main(["track", str(det)]) == 0
    tracks = read_tracks(simulated.with_name("lanes_cam0_tracks.txt"))
    assert len({t.track_id for t in tracks}) == 3


def test_eval_ground_truth_as_tracks(tmp_path, simulated, capsys):
    ann = json.loads(simulated.read_text())
    lines = []
    for f in ann["frames"]:
        for p in f["pedestrians"]:
            x0, y0, x1, y1 = p["bbox"]
            lines.append(f"{f['frame'] + 1},{p['id']},{x0:.2f},{y0:.2f},{x1 - x0:.2f},{y1 - y0:.2f},1,-1,-1,-1")
    gt_tracks = tmp_path / "gt.txt"
    gt_tracks.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["eval", str(simulated), str(gt_tracks), "-o", str(tmp_path / "r.json")]) == 0
    out = capsys.readouterr().out
    assert "100.0" in out and "MOTA" in out
    report = json.loads((tmp_path / "r.json").read_text())
    validate(report, "report")
    assert report["mota"] == 1.0 and report["idf1"] == 1.0


def test_eval_flag_ranges_and_frame_mismatch(tmp_path, simulated, capsys):
    tracks = tmp_path / "late.txt"
    tracks.write_text("150,1,10,10,5,5,1,-1,-1,-1\n60,1,10,10,5,5,1,-1,-1,-1\n")
    assert main(["eval", str(simulated), str(tracks), "--iou", "1.01"]) == 1
    assert main(["eval", str(simulated), str(tracks), "--visibility-floor", "1"]) == 1
    capsys.readouterr()
    assert main(["eval", str(simulated), str(tracks)]) == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    validate(json.loads(captured.out[: captured.out.index("}\n") + 2]), "report")


def test_pipeline_and_manifest_replay(tmp_path, lanes, capsys):
    out = tmp_path / "new" / "run"
    assert main(["pipeline", str(lanes), str(out), "--profile", "fog", "--seed", "3", "--tracker", "iou"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    validate(manifest, "manifest")
    assert manifest["seed"] == 3 and manifest["tracker"]["name"] == "iou"
    again = tmp_path / "again"
    assert main(["pipeline", "--manifest", str(out / "manifest.json"), str(again)]) == 0
    for name in list(manifest["outputs"]) + ["manifest.json"]:
        assert (out / name).read_bytes() == (again / name).read_bytes(), name


def test_manifest_rejects_edited_inputs(tmp_path, lanes):
    out = tmp_path / "run"
    assert main(["pipeline", str(lanes), str(out)]) == 0
    lanes.write_text(LANES.replace("duration_frames = 120", "duration_frames = 90"))
    assert main(["pipeline", "--manifest", str(out / "manifest.json"), str(tmp_path / "r")]) == 1
