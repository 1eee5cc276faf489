"""
Lidarly command-line entry point.

Every subcommand prints one JSON document on stdout; logs go to stderr.
Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add current directory to Python path
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from pydantic import ValidationError

from formats.json_io import dumps, read_box_track, read_calibration, read_json, write_json, write_ray_updates_csv
from formats.lray import read_lray, write_lray
from formats.pgm import write_pgm
from formats.ply import write_ply
from geometry.masks import rect_mask_from_box, roi_mask_from_box, square_crop_for_mask
from models.config_models import PipelineConfig
from models.scene_models import DegradationConfig, SceneConfig
from oracle_sim.bundle import ABLATIONS, BUNDLE_FILES, make_bundle, read_manifest, write_bundle
from pipelines.evaluate_pipeline import EvaluationPipeline
from pipelines.fit_pipeline import DepthFitPipeline
from pipelines.inpaint_pipeline import InpaintPipeline
from utils.errors import BehindCamera, ConfigError, EmptyMask, FormatError, LidarlyError
from utils.log import configure_logging
from utils.pipeline_utils import load_pipeline_inputs
from utils.settings import get_settings

logger = logging.getLogger("lidarly")

FORMATS_HELP = """file formats:
  calibration JSON  {"fx", "fy", "cx", "cy", "width", "height",
                     "pose": {"rotation": [9 numbers, row-major], "translation": [3]}}
                    pose maps world points into the camera frame (x right, y down, z forward)
  box track JSON    [{"frame": int, "center": [3], "size": [l, w, h], "yaw": rad, "pitch": rad}, ...]
                    box axes are the columns of Rz(yaw) @ Ry(pitch) in the world frame
  crop JSON         {"x0", "y0", "side", "target", "encloses_mask", "scale"}; the depth raster covers
                    full-frame pixels [x0, x0 + side) x [y0, y0 + side) resized to target x target
  depth .pfm        "Pf" one-channel float32, little-endian (scale -1), rows stored bottom-up;
                    relative depth grows with distance (use --invert-disparity for disparity maps)
  mask .pgm         binary P5, 255 = object, 0 = background
  scan .lray        16-byte header (b"LIDARLY\\0", u32 version = 1, u32 reserved), u64 ray count,
                    then per ray 7 little-endian float32: origin xyz, direction xyz, range;
                    range = +inf means no return
  points .ply       x/y/z float32 in meters, ascii or binary_little_endian
  ray updates .csv  ray_index, old_range, new_range, ix, iy, iz
  scene JSON        see scenes/example_scene.json

environment:
  LIDARLY_THREADS     default worker threads (1)
  LIDARLY_LOG_LEVEL   default log level (INFO)
  LIDARLY_RANSAC_SEED default RANSAC seed (0)
"""


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--calibration", type=Path, required=True, help="Calibration JSON")
    parser.add_argument("--scan", type=Path, required=True, help="Input .lray scan (world frame)")
    parser.add_argument("--depth", type=Path, required=True, help="Relative depth .pfm")
    parser.add_argument("--mask", type=Path, required=True, help="Object mask .pgm, same size as the depth raster")
    parser.add_argument("--boxes", type=Path, required=True, help="Box-track JSON")
    parser.add_argument("--crop", type=Path, help="Crop JSON from `project` when the depth raster is a crop")
    parser.add_argument("--frame", type=int, help="Track frame (default: first)")


def _add_knob_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gradient-threshold", type=float, help="Relative-depth units per pixel (default: 0.05 x depth range in mask)")
    parser.add_argument("--skip-gradient-filter", action="store_true", default=None)
    parser.add_argument("--drop-contour", dest="keep_contour", action="store_false", default=None,
                        help="Do not restore occluding silhouette pixels after the gradient filter")
    parser.add_argument("--ransac-tol", type=float, help="Inlier tolerance in meters (0.05)")
    parser.add_argument("--ransac-iterations", type=int, help="RANSAC iterations (1000)")
    parser.add_argument("--ransac-seed", type=int, help="RANSAC seed (LIDARLY_RANSAC_SEED)")
    parser.add_argument("--voxel-resolution", type=int, nargs=3, metavar=("NX", "NY", "NZ"), help="Voxel counts (64 64 64)")
    parser.add_argument("--dilation", dest="dilation_radius", type=int, help="Occupancy dilation radius in voxels (0)")
    parser.add_argument("--enlarge-pct", type=float, help="RoI enlargement fraction (0.10)")
    parser.add_argument("--invert-disparity", action="store_true", default=None, help="Depth file holds disparity")
    parser.add_argument("--absrel-denominator", choices=["reconstructed", "ground_truth"])
    parser.add_argument("--voxel-center-distance", action="store_true", default=None, help="Use voxel-center instead of entry distance")
    parser.add_argument("--lp-fallback", action="store_true", default=None, help="Recover from an infeasible or unbounded LP instead of failing")


_CONFIG_KEYS = [
    "calibration", "scan", "depth", "mask", "boxes", "crop", "frame",
    "gradient_threshold", "skip_gradient_filter", "keep_contour", "ransac_tol", "ransac_iterations", "ransac_seed",
    "voxel_resolution", "dilation_radius", "enlarge_pct", "invert_disparity", "absrel_denominator",
    "voxel_center_distance", "lp_fallback", "threads",
]


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """PipelineConfig from the flags that were given; everything else keeps its default"""
    values = {key: getattr(args, key) for key in _CONFIG_KEYS if getattr(args, key, None) is not None}
    if "voxel_resolution" in values:
        values["voxel_resolution"] = tuple(values["voxel_resolution"])
    return PipelineConfig(**values)


def cmd_project(args: argparse.Namespace) -> Dict[str, Any]:
    cam = read_calibration(args.calibration)
    track = read_box_track(args.boxes)
    if args.all_frames:
        frames = [f.frame for f in track.frames]
    elif args.reference_yaw is not None:
        frames = [track.frame_nearest_yaw(args.reference_yaw)]
    else:
        frames = [args.frame if args.frame is not None else track.frames[0].frame]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    make_mask = rect_mask_from_box if args.rectangular else roi_mask_from_box
    results: List[Dict[str, Any]] = []
    for frame in frames:
        try:
            box = track.box_at(frame)
        except KeyError as exc:
            raise ConfigError(f"frame {frame} is not in the box track") from exc
        try:
            mask = make_mask(cam, box, args.enlarge_pct)
        except (BehindCamera, EmptyMask) as exc:
            if args.all_frames:
                logger.warning("⚠️ frame %d skipped: %s", frame, exc)
                continue
            if isinstance(exc, EmptyMask):
                raise
            raise ConfigError(f"frame {frame}: box is not in front of the camera: {exc}") from exc
        crop = square_crop_for_mask(mask, args.target)
        stem = f"mask_{frame:04d}" if args.all_frames else "mask"
        write_pgm(out / f"{stem}.pgm", mask)
        write_json(out / f"{stem.replace('mask', 'crop')}.json", crop.to_json())
        results.append({
            "frame": frame,
            "mask": str(out / f"{stem}.pgm"),
            "crop": crop.to_json(),
            "mask_pixels": mask.area,
        })
    config = {"enlarge_pct": args.enlarge_pct, "target": args.target, "rectangular": args.rectangular,
              "all_frames": args.all_frames, "reference_yaw": args.reference_yaw, "frame": args.frame}
    return {"frames": results, "config": config}


def cmd_fit(args: argparse.Namespace) -> Dict[str, Any]:
    config = build_config(args)
    inputs = load_pipeline_inputs(config)
    result = DepthFitPipeline(config).run(inputs.camera, inputs.scan, inputs.depth, inputs.mask, inputs.box)
    payload = result.report.model_dump(mode="json")
    payload["frame"] = inputs.frame
    if args.out:
        write_json(args.out, payload)
    return payload


def cmd_inpaint(args: argparse.Namespace) -> Dict[str, Any]:
    config = build_config(args)
    inputs = load_pipeline_inputs(config)
    result = InpaintPipeline(config).run(inputs.camera, inputs.scan, inputs.depth, inputs.mask, inputs.box)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "scan": str(out / "scan_inpainted.lray"),
        "updates": str(out / "ray_updates.csv"),
        "points": str(out / "object_points.ply"),
        "voxels": str(out / "occupied_voxels.ply"),
        "report": str(out / "inpaint_report.json"),
    }
    write_lray(files["scan"], result.scan)
    write_ray_updates_csv(files["updates"], result.updates)
    encoding = "binary" if args.binary_ply else "ascii"
    write_ply(files["points"], result.points_world, encoding=encoding, comment="lifted object points, world frame")
    voxel_centers = inputs.camera.pose.inverse().apply(result.grid.occupied_centers())
    write_ply(files["voxels"], voxel_centers, encoding=encoding, comment="occupied voxel centers, world frame")
    payload = {**result.report.model_dump(mode="json"), "frame": inputs.frame, "files": files}
    write_json(files["report"], payload)
    return payload


def cmd_simulate(args: argparse.Namespace) -> Dict[str, Any]:
    data = read_json(args.scene)
    try:
        scene = SceneConfig.from_json(data)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{args.scene}: missing or malformed field {exc}") from exc
    overrides = {key: getattr(args, key) for key in ("noise_sigma", "edge_blur", "outlier_fraction", "mask_mode", "flat_depth")
                 if getattr(args, key) is not None}
    if overrides:
        if "mask_mode" in overrides:
            overrides["mask"] = overrides.pop("mask_mode")
        # validated copy, the flags have ranges too
        degradation = DegradationConfig(**{**scene.degradation.model_dump(), **overrides})
        scene = scene.model_copy(update={"degradation": degradation})
    bundle = make_bundle(scene, args.seed)
    paths = write_bundle(bundle, args.out)
    return {
        "files": paths,
        "rays": len(bundle.scan_gt),
        "returns": int(bundle.scan_gt.has_return.sum()),
        "object_rays": int(bundle.object_rays.size),
        "silhouette_pixels": bundle.silhouette.area,
        "alpha": bundle.alpha,
        "beta": bundle.beta,
        "seed": bundle.scene.seed,
        "config": {"scene": str(args.scene), "degradation": bundle.scene.degradation.model_dump()},
    }


def cmd_evaluate(args: argparse.Namespace) -> Dict[str, Any]:
    config = build_config(args)
    manifest = read_manifest(args.bundle)
    pipeline = EvaluationPipeline(config)
    if args.ablation:
        report = pipeline.run_ablation(manifest, args.ablation)
    else:
        if args.reconstructed is None:
            raise ConfigError("evaluate needs --reconstructed or --ablation")
        if manifest.box is None:
            raise ConfigError("bundle has no object box to evaluate against")
        gt_scan = read_lray(Path(args.bundle) / manifest.files.get("scan_gt", BUNDLE_FILES["scan_gt"]))
        report = pipeline.score(gt_scan, read_lray(args.reconstructed), manifest.box)
    payload = report.model_dump(mode="json")
    if args.out:
        write_json(args.out, payload)
    return payload


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidarly",
        description="Insert objects into LiDAR scans from a relative depth map and a 3D box.",
        epilog=FORMATS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--log-level", help="Log level (LIDARLY_LOG_LEVEL)")
    parser.add_argument("--threads", type=int, help="Worker threads (LIDARLY_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    project = sub.add_parser("project", help="Project a box into an RoI mask and square crop",
                             epilog=FORMATS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    project.add_argument("--calibration", type=Path, required=True)
    project.add_argument("--boxes", type=Path, required=True)
    project.add_argument("--frame", type=int, help="Track frame (default: first)")
    project.add_argument("--all-frames", action="store_true", help="One mask per track frame")
    project.add_argument("--reference-yaw", type=float, help="Use the frame whose yaw is closest to this (radians)")
    project.add_argument("--rectangular", action="store_true", help="Axis-aligned 2D box instead of the hull")
    project.add_argument("--enlarge-pct", type=float, default=0.10)
    project.add_argument("--target", type=int, default=512, help="Resized crop side (pixels)")
    project.add_argument("--out", required=True, help="Output directory")
    project.set_defaults(handler=cmd_project)

    fit = sub.add_parser("fit", help="Fit relative -> metric depth (RANSAC + box LP)",
                         epilog=FORMATS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_input_args(fit)
    _add_knob_args(fit)
    fit.add_argument("--out", help="Also write the params JSON here")
    fit.set_defaults(handler=cmd_fit)

    inpaint = sub.add_parser("inpaint", help="Run the full pipeline and rewrite ray ranges",
                             epilog=FORMATS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_input_args(inpaint)
    _add_knob_args(inpaint)
    inpaint.add_argument("--binary-ply", action="store_true", help="Write binary_little_endian PLY")
    inpaint.add_argument("--out", required=True, help="Output directory")
    inpaint.set_defaults(handler=cmd_inpaint)

    simulate = sub.add_parser("simulate", help="Generate a synthetic scene bundle",
                              epilog=FORMATS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    simulate.add_argument("--scene", type=Path, required=True, help="Scene JSON")
    simulate.add_argument("--seed", type=int, help="Overrides the scene seed")
    simulate.add_argument("--noise-sigma", type=float, help="Gaussian noise on relative depth")
    simulate.add_argument("--edge-blur", type=float, help="Gaussian blur sigma in pixels on relative depth (smears silhouettes)")
    simulate.add_argument("--outlier-fraction", type=float, help="Share of background pixels replaced by outliers")
    simulate.add_argument("--mask-mode", choices=["silhouette", "roi"])
    simulate.add_argument("--flat-depth", action="store_true", default=None)
    simulate.add_argument("--out", required=True, help="Bundle directory")
    simulate.set_defaults(handler=cmd_simulate)

    evaluate = sub.add_parser("evaluate", help="Score a reconstruction against a bundle",
                              epilog=FORMATS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    evaluate.add_argument("--bundle", type=Path, required=True, help="Bundle directory from `simulate`")
    evaluate.add_argument("--reconstructed", type=Path, help="Inpainted .lray")
    evaluate.add_argument("--ablation", choices=sorted(ABLATIONS), help="Re-run the pipeline on the bundle's scene with this degradation")
    _add_knob_args(evaluate)
    evaluate.add_argument("--out", help="Also write the report JSON here")
    evaluate.set_defaults(handler=cmd_evaluate)
    return parser


def _fail(exc: BaseException, code: int) -> int:
    logger.error("❌ %s: %s", type(exc).__name__, exc)
    print(dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}))
    return code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level or get_settings().log_level)
        payload = args.handler(args)
    except LidarlyError as exc:
        return _fail(exc, exc.exit_code)
    except (ValidationError, ValueError) as exc:
        return _fail(exc, 2)
    except FileNotFoundError as exc:
        return _fail(exc, 2)
    except OSError as exc:
        return _fail(exc, 4)
    print(dumps(payload))
    return 0


if __name__ == "__main__":
    sys.exit(main())
