"""Command-line front end: ``pedsim simulate|detect|track|eval|pipeline``.

Exit codes: 0 success, 1 user or configuration error, 2 environment or I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .annotation import AnnotationFile
from .metrics import EvalConfig, EvaluationError
from .perception import (
    PROFILES,
    DetectorModel,
    MotFormatError,
    dumps_detections,
    dumps_tracks,
    read_detections,
    read_tracks,
    synthesize_detections,
)
from .pipeline import (
    SEED_ENV,
    TRACKERS,
    ManifestMismatch,
    PipelineConfig,
    annotate_all,
    annotation_name,
    atomic_write,
    config_from_manifest,
    evaluate,
    resolve_profile,
    resolve_scenario_path,
    resolve_seed,
    run_pipeline,
    run_tracker,
    with_seed,
    write_masks,
)
from .scenario import ConfigSyntaxError, ScenarioError, load_scenario
from .simulation import run_simulation

EXIT_OK, EXIT_USER, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    """Bad arguments or inputs; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _unit_interval(name: str, lo_open: bool, hi_open: bool):
    def parse(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        lo_ok = v > 0 if lo_open else v >= 0
        hi_ok = v < 1 if hi_open else v <= 1
        if not (lo_ok and hi_ok):
            lb, rb = "(" if lo_open else "[", ")" if hi_open else "]"
            raise argparse.ArgumentTypeError(f"{name} {v} outside {lb}0, 1{rb}")
        return v

    return parse


_iou_arg = _unit_interval("--iou", lo_open=True, hi_open=False)
_floor_arg = _unit_interval("--visibility-floor", lo_open=False, hi_open=True)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _default_output(src: str, suffix: str) -> Path:
    p = Path(src)
    stem = p.stem
    for tail in ("_det", "_tracks"):
        if stem.endswith(tail):
            stem = stem[: -len(tail)]
    return p.with_name(stem + suffix)


# -- subcommands ------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    scenario = load_scenario(resolve_scenario_path(args.scenario))
    scenario = with_seed(scenario, resolve_seed(args.seed, scenario.seed))
    out = Path(args.out_dir)
    trace = run_simulation(scenario)
    cams = args.camera or [c.id for c in scenario.cameras]
    unknown = [c for c in cams if c not in {k.id for k in scenario.cameras}]
    if unknown:
        raise UsageError(f"unknown camera id(s): {', '.join(unknown)}")
    if args.camera:
        scenario = dataclasses.replace(scenario, cameras=tuple(c for c in scenario.cameras if c.id in cams))
    files = annotate_all(scenario, trace, workers=min(4, len(cams)))
    for cam_id, ann in files.items():
        path = out / annotation_name(scenario.name, cam_id)
        atomic_write(path, ann.to_json())
        _say(f"wrote {path} ({len(ann.frames)} frames)")
        if args.masks:
            n = write_masks(trace, scenario, cam_id, out / "masks", args.mask_divisor)
            _say(f"wrote {n} masks to {out / 'masks'}")
    if args.trace:
        path = out / f"{scenario.name}_trace.json"
        atomic_write(path, json.dumps(trace.to_dict(), indent=1) + "\n")
        _say(f"wrote {path}")
    return EXIT_OK


def _read_annotations(path) -> AnnotationFile:
    try:
        return AnnotationFile.read(path)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a valid annotation file ({exc})") from None


def cmd_detect(args) -> int:
    ann = _read_annotations(args.gt)
    try:
        _, spec = resolve_profile(args.profile)
    except KeyError:
        raise UsageError(
            f"unknown profile {args.profile!r}; available: {', '.join(PROFILES)} or a path to a degradation .cfg file"
        ) from None
    seed = resolve_seed(args.seed, ann.seed)
    dets = synthesize_detections(ann.frames, DetectorModel(spec, seed))
    out = Path(args.output) if args.output else _default_output(args.gt, "_det.txt")
    atomic_write(out, dumps_detections(dets))
    _say(f"wrote {out} ({len(dets)} detections, profile {args.profile}, seed {seed})")
    return EXIT_OK


def _tracker_params(args) -> dict:
    keys = ["iou_min", "max_age", "min_hits"]
    if args.tracker == "kalman":
        keys += ["process_noise", "measurement_noise"]
    params = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    if args.tracker == "kalman" and args.emit_predictions:
        params["emit_predictions"] = True
    return params


def cmd_track(args) -> int:
    dets = read_detections(args.detections)
    tracks = run_tracker(dets, args.tracker, _tracker_params(args))
    out = Path(args.output) if args.output else _default_output(args.detections, "_tracks.txt")
    atomic_write(out, dumps_tracks(tracks))
    n_ids = len({t.track_id for t in tracks})
    _say(f"wrote {out} ({len(tracks)} boxes, {n_ids} tracks)")
    return EXIT_OK


def _restrict(ann: AnnotationFile, tracks):
    """Keep only frames present in both inputs' frame ranges; warn when they differ."""
    gt_frames = {f.frame_index for f in ann.frames}
    hyp_frames = {t.frame_index for t in tracks}
    if not hyp_frames or hyp_frames <= gt_frames:
        return ann.frames, tracks
    lo = max(min(gt_frames), min(hyp_frames))
    hi = min(max(gt_frames), max(hyp_frames))
    _say(
        f"warning: frame ranges differ (gt {min(gt_frames)}..{max(gt_frames)}, "
        f"tracks {min(hyp_frames)}..{max(hyp_frames)}); evaluating frames {lo}..{hi}"
    )
    frames = tuple(f for f in ann.frames if lo <= f.frame_index <= hi)
    return frames, [t for t in tracks if lo <= t.frame_index <= hi]


def cmd_eval(args) -> int:
    ann = _read_annotations(args.gt)
    tracks = read_tracks(args.tracks)
    frames, tracks = _restrict(ann, tracks)
    report = evaluate(dataclasses.replace(ann, frames=tuple(frames)), tracks, EvalConfig(args.iou, args.visibility_floor))
    if args.output:
        atomic_write(args.output, report.to_json())
    else:
        sys.stdout.write(report.to_json())
    sys.stdout.write(report.table(args.name or f"{ann.scenario}/{ann.camera_id}"))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    if args.manifest:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        try:
            cfg = config_from_manifest(manifest)
        except (KeyError, TypeError) as exc:
            raise UsageError(f"{args.manifest}: malformed manifest ({exc})") from None
        out_dir = args.scenario_or_out if args.out_dir is None else args.out_dir
    else:
        if args.out_dir is None:
            raise UsageError("pipeline needs SCENARIO and OUT_DIR (or --manifest FILE OUT_DIR)")
        scenario = load_scenario(resolve_scenario_path(args.scenario_or_out))
        try:
            resolve_profile(args.profile)
        except KeyError:
            raise UsageError(f"unknown profile {args.profile!r}; available: {', '.join(PROFILES)}") from None
        cfg = PipelineConfig(
            scenario_path=args.scenario_or_out,
            seed=resolve_seed(args.seed, scenario.seed),
            profile=args.profile,
            tracker=args.tracker,
            tracker_params=_tracker_params(args),
            iou_threshold=args.iou,
            visibility_floor=args.visibility_floor,
            masks=args.masks,
        )
        out_dir = args.out_dir
    result = run_pipeline(cfg, out_dir)
    for cam_id, report in result.reports.items():
        sys.stdout.write(report.table(f"{result.manifest['scenario']['name']}/{cam_id}"))
    _say(f"wrote {len(result.files)} files and manifest.json to {out_dir}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------


def _add_tracker_flags(p, default: str | None = "kalman"):
    p.add_argument("--tracker", choices=TRACKERS, default=default, help="tracker family (default: %(default)s)")
    p.add_argument("--iou-min", type=float, help="association gate on IoU (iou: 0.3, kalman: 0.3)")
    p.add_argument("--max-age", type=int, help="frames a lost track survives (iou: 10, kalman: 30)")
    p.add_argument("--min-hits", type=int, help="consecutive hits before a track is reported (iou: 2, kalman: 3)")
    p.add_argument("--process-noise", type=float, help="kalman process noise scale (default 1.0)")
    p.add_argument("--measurement-noise", type=float, help="kalman measurement noise scale (default 1.0)")
    p.add_argument(
        "--emit-predictions", action="store_true", help="kalman: emit predicted boxes on missed frames"
    )


def _add_eval_flags(p):
    p.add_argument("--iou", type=_iou_arg, default=0.5, help="match threshold in (0, 1] (default: %(default)s)")
    p.add_argument(
        "--visibility-floor",
        type=_floor_arg,
        default=0.0,
        help="drop ground truth below this visibility, in [0, 1) (default: %(default)s)",
    )


def build_parser() -> argparse.ArgumentParser:
    seed_help = f"random seed (default: ${SEED_ENV}, else the seed recorded in the input)"
    parser = _Parser(prog="pedsim", description="Synthetic pedestrian tracking benchmark generator and evaluator.")
    parser.add_argument("--version", action="version", version=f"pedsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a scenario and write annotation JSON per camera")
    p.add_argument("scenario", help="scenario .cfg file or shipped scenario name")
    p.add_argument("out_dir", help="output directory (created if missing)")
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--camera", action="append", help="annotate only this camera id (repeatable)")
    p.add_argument("--masks", action="store_true", help="write instance masks as PGM files under OUT_DIR/masks")
    p.add_argument("--mask-divisor", type=int, default=4, help="mask raster = camera resolution / N (default: 4)")
    p.add_argument("--trace", action="store_true", help="also dump the raw simulation trace")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="synthesize degraded detections from annotation JSON")
    p.add_argument("gt", help="annotation JSON written by simulate")
    p.add_argument("-o", "--output", help="detections file (default: <gt>_det.txt)")
    p.add_argument(
        "--profile", default="clear", help=f"{', '.join(PROFILES)}, or a degradation .cfg (default: clear)"
    )
    p.add_argument("--seed", type=int, help=seed_help)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("track", help="link detections into tracks")
    p.add_argument("detections", help="detections in MOT text format")
    p.add_argument("-o", "--output", help="tracks file (default: <detections>_tracks.txt)")
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score tracks against annotation JSON")
    p.add_argument("gt", help="annotation JSON")
    p.add_argument("tracks", help="tracks in MOT text format")
    p.add_argument("-o", "--output", help="write the report JSON here instead of stdout")
    p.add_argument("--name", help="row label for the table")
    _add_eval_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="simulate, detect, track and evaluate in one go, with a manifest")
    p.add_argument("scenario_or_out", metavar="SCENARIO", help="scenario .cfg or shipped name (OUT_DIR with --manifest)")
    p.add_argument("out_dir", nargs="?", metavar="OUT_DIR", help="output directory (created if missing)")
    p.add_argument("--manifest", help="replay the run recorded in this manifest.json")
    p.add_argument("--profile", default="clear", help=f"{', '.join(PROFILES)}, or a degradation .cfg")
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--masks", action="store_true", help="also write instance masks")
    _add_tracker_flags(p)
    _add_eval_flags(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _say(f"error: {exc}")
        return EXIT_USER
    except ScenarioError as exc:
        _say(f"error: invalid scenario ({len(exc.violations)} violation(s)):")
        for v in exc.violations:
            _say(f"  {v}")
        return EXIT_USER
    except (ConfigSyntaxError, MotFormatError, EvaluationError, ManifestMismatch) as exc:
        _say(f"error: {exc}")
        return EXIT_USER
    except OSError as exc:
        _say(f"error: {exc}")
        return EXIT_IO
    except ValueError as exc:
        _say(f"error: {exc}")
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
