"""End-to-end orchestration: simulate, annotate, degrade, track, evaluate.

Everything a run depends on is captured in a manifest (seed, parameters,
input hashes), and ``replay`` re-runs from one. Files are written atomically.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import platform
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .annotation import AnnotationFile, annotation_file, default_raster, mask_filename, render_tick_mask
from .metrics import EvalConfig, EvalReport, eval_report, gt_from_annotations
from .perception import (
    PROFILES,
    DetectorModel,
    dumps_detections,
    dumps_tracks,
    synthesize_detections,
    tracks_to_frames,
)
from .scenario import DegradationSpec, Scenario, load_scenario, load_toml, parse_degradation, shipped_scenario_path, shipped_scenarios
from .simulation import SimTrace, run_simulation
from .trackers import KalmanParams, track_iou, track_kalman

SEED_ENV = "PEDSIM_SEED"
MANIFEST_NAME = "manifest.json"
TRACKERS = ("iou", "kalman")
IOU_DEFAULTS = {"iou_min": 0.3, "max_age": 10, "min_hits": 2}
KALMAN_DEFAULTS = dataclasses.asdict(KalmanParams())


def resolve_seed(explicit: int | None, fallback: int) -> int:
    """Command-line seed, else ``PEDSIM_SEED``, else the scenario's own seed."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(SEED_ENV, "").strip()
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV}={env!r} is not an integer") from None
    return int(fallback)


def resolve_scenario_path(arg) -> Path:
    p = Path(arg)
    if not p.exists() and str(arg) in shipped_scenarios():
        return shipped_scenario_path(str(arg))
    return p


def resolve_profile(arg: str) -> tuple[str, DegradationSpec]:
    """A shipped profile name, or a TOML file holding degradation keys (optionally under ``[degradation]``)."""
    if arg in PROFILES:
        return arg, PROFILES[arg]
    p = Path(arg)
    if not p.suffix or not p.exists():
        raise KeyError(arg)
    table = load_toml(p.read_text(encoding="utf-8"))
    table = table.get("degradation", table)
    table = {k: v for k, v in table.items() if k != "format"}
    return str(p), parse_degradation(table)


def run_tracker(detections, tracker: str, params: dict | None = None):
    params = dict(params or {})
    if tracker == "iou":
        return track_iou(detections, **{**IOU_DEFAULTS, **params})
    if tracker == "kalman":
        return track_kalman(detections, KalmanParams(**{**KALMAN_DEFAULTS, **params}))
    raise KeyError(tracker)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def atomic_write(path, data: bytes | str) -> None:
    """Write to a sibling temp file, then rename over the target."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    return scenario if scenario.seed == seed else dataclasses.replace(scenario, seed=seed)


def annotate_all(scenario: Scenario, trace: SimTrace | None = None, workers: int = 1) -> dict[str, AnnotationFile]:
    """Annotation files for every camera; cameras run in parallel when ``workers > 1``."""
    trace = trace or run_simulation(scenario)
    ids = [c.id for c in scenario.cameras]
    if workers > 1 and len(ids) > 1:
        with ThreadPoolExecutor(workers) as pool:
            files = list(pool.map(lambda cid: annotation_file(trace, scenario, cid), ids))
    else:
        files = [annotation_file(trace, scenario, cid) for cid in ids]
    return dict(zip(ids, files))


def write_masks(trace: SimTrace, scenario: Scenario, camera_id: str, out_dir, divisor: int = 4) -> int:
    raster = default_raster(scenario.camera(camera_id).intrinsics, divisor)
    for tick in trace.ticks:
        mask = render_tick_mask(tick, scenario, camera_id, raster)
        atomic_write(Path(out_dir) / mask_filename(scenario.name, camera_id, tick.index), mask.to_pgm())
    return len(trace.ticks)


def evaluate(annotations: AnnotationFile, tracks, cfg: EvalConfig = EvalConfig()) -> EvalReport:
    return eval_report(gt_from_annotations(annotations.frames, cfg.visibility_floor), tracks_to_frames(tracks), cfg)


def annotation_name(scenario: str, camera_id: str) -> str:
    return f"{scenario}_{camera_id}.json"


@dataclass
class PipelineConfig:
    scenario_path: str
    seed: int
    profile: str = "clear"
    tracker: str = "kalman"
    tracker_params: dict = field(default_factory=dict)
    iou_threshold: float = 0.5
    visibility_floor: float = 0.0
    masks: bool = False


@dataclass
class PipelineResult:
    reports: dict[str, EvalReport]
    files: dict[str, str]  # relative name -> sha256
    manifest: dict


def _environment() -> dict:
    return {"pedsim": __version__, "numpy": np.__version__, "python": platform.python_version()}


def run_pipeline(cfg: PipelineConfig, out_dir) -> PipelineResult:
    """Run every stage for every camera with one seed and write all artifacts plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario_file = resolve_scenario_path(cfg.scenario_path)
    scenario = with_seed(load_scenario(scenario_file), cfg.seed)
    profile_source, degradation = resolve_profile(cfg.profile)
    if cfg.tracker not in TRACKERS:
        raise KeyError(cfg.tracker)
    eval_cfg = EvalConfig(cfg.iou_threshold, cfg.visibility_floor)
    trace = run_simulation(scenario)
    files: dict[str, str] = {}
    reports: dict[str, EvalReport] = {}

    def emit(name: str, data) -> None:
        data = data.encode("utf-8") if isinstance(data, str) else data
        atomic_write(out / name, data)
        files[name] = sha256_bytes(data)

    for cam_id, ann in annotate_all(scenario, trace, workers=min(4, len(scenario.cameras))).items():
        stem = f"{scenario.name}_{cam_id}"
        emit(annotation_name(scenario.name, cam_id), ann.to_json())
        dets = synthesize_detections(ann.frames, DetectorModel(degradation, cfg.seed))
        emit(f"{stem}_det.txt", dumps_detections(dets))
        tracks = run_tracker(dets, cfg.tracker, cfg.tracker_params)
        emit(f"{stem}_tracks.txt", dumps_tracks(tracks))
        report = evaluate(ann, tracks, eval_cfg)
        reports[cam_id] = report
        emit(f"{stem}_report.json", report.to_json())
        if cfg.masks:
            write_masks(trace, scenario, cam_id, out / "masks")

    manifest = {
        "format_version": 1,
        "environment": _environment(),
        "scenario": {"path": str(cfg.scenario_path), "name": scenario.name, "sha256": sha256_file(scenario_file)},
        "seed": cfg.seed,
        "profile": _profile_entry(cfg.profile, profile_source, degradation),
        "tracker": {"name": cfg.tracker, "params": _tracker_params(cfg)},
        "eval": {"iou_threshold": cfg.iou_threshold, "visibility_floor": cfg.visibility_floor},
        "masks": cfg.masks,
        "outputs": dict(sorted(files.items())),
    }
    atomic_write(out / MANIFEST_NAME, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return PipelineResult(reports, files, manifest)


def _profile_entry(name: str, source: str, degradation: DegradationSpec) -> dict:
    entry = {"name": name, "degradation": dataclasses.asdict(degradation)}
    if name not in PROFILES:
        entry["sha256"] = sha256_file(source)
    return entry


def _tracker_params(cfg: PipelineConfig) -> dict:
    base = IOU_DEFAULTS if cfg.tracker == "iou" else KALMAN_DEFAULTS
    return {**base, **cfg.tracker_params}


class ManifestMismatch(ValueError):
    pass


def config_from_manifest(manifest: dict, check_inputs: bool = True) -> PipelineConfig:
    scen = manifest["scenario"]
    path = resolve_scenario_path(scen["path"])
    if check_inputs and sha256_file(path) != scen["sha256"]:
        raise ManifestMismatch(f"scenario {scen['path']} changed since the manifest was written")
    prof = manifest["profile"]
    if check_inputs and "sha256" in prof and sha256_file(prof["name"]) != prof["sha256"]:
        raise ManifestMismatch(f"profile {prof['name']} changed since the manifest was written")
    return PipelineConfig(
        scenario_path=scen["path"],
        seed=int(manifest["seed"]),
        profile=manifest["profile"]["name"],
        tracker=manifest["tracker"]["name"],
        tracker_params=dict(manifest["tracker"]["params"]),
        iou_threshold=float(manifest["eval"]["iou_threshold"]),
        visibility_floor=float(manifest["eval"]["visibility_floor"]),
        masks=bool(manifest.get("masks", False)),
    )


def replay(manifest_path, out_dir) -> PipelineResult:
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    return run_pipeline(config_from_manifest(manifest), out_dir)
