#!/usr/bin/env python3
"""
Run every ablation variant over several seeds of one synthetic scene and write the table as CSV.

Usage: python scripts/run_ablation.py scenes/example_scene.json --seeds 0 1 2 --out ablation.csv
"""

import argparse
import logging
import os
import sys
from typing import Dict, List, Optional

import numpy as np
from pydantic import ValidationError

# Add the application directory to Python path
current_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, current_dir)

from formats.json_io import dumps, read_json
from metrics.reconstruction import write_reports_csv
from models.config_models import PipelineConfig
from models.report_models import EvalReport
from models.scene_models import SceneConfig
from oracle_sim.bundle import ABLATIONS, ablation_scene, make_bundle
from pipelines.evaluate_pipeline import EvaluationPipeline, variant_config
from utils.errors import LidarlyError
from utils.log import configure_logging
from utils.settings import get_settings

logger = logging.getLogger("lidarly.ablation")


def run_variant(scene: SceneConfig, variant: str, seed: int, config: PipelineConfig) -> EvalReport:
    bundle = make_bundle(ablation_scene(scene, variant), seed)
    pipeline = EvaluationPipeline(config)
    result = pipeline.inpaint_bundle(bundle, variant)
    return EvaluationPipeline(variant_config(config, variant)).score(bundle.scan_gt, result.scan, bundle.box, variant)


def summarize(reports: List[EvalReport]) -> Dict[str, Dict[str, Optional[float]]]:
    """Per-variant mean of the object metrics over seeds that produced them"""
    summary: Dict[str, Dict[str, Optional[float]]] = {}
    for variant in ABLATIONS:
        rows = [r for r in reports if r.variant == variant]
        entry: Dict[str, Optional[float]] = {"runs": float(len(rows))}
        for key in ("absrel_object", "l2_object", "miss_rate"):
            values = [getattr(r, key) for r in rows if getattr(r, key) is not None]
            entry[key] = float(np.mean(values)) if values else None
        summary[variant] = entry
    return summary


def startup_exit_code(exc: Exception) -> int:
    """Same codes as main.py: the error's own, 4 for unreadable files, 2 for any other bad input"""
    if isinstance(exc, LidarlyError):
        return exc.exit_code
    if isinstance(exc, OSError) and not isinstance(exc, FileNotFoundError):
        return 4
    return 2


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("scene", help="Scene JSON")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--variants", nargs="+", choices=sorted(ABLATIONS), default=list(ABLATIONS))
    parser.add_argument("--voxel-resolution", type=int, nargs=3, default=[64, 64, 64])
    parser.add_argument("--out", default="ablation.csv", help="CSV table")
    args = parser.parse_args(argv)

    try:
        configure_logging(get_settings().log_level)
        scene = SceneConfig.from_json(read_json(args.scene))
        config = PipelineConfig(voxel_resolution=tuple(args.voxel_resolution))
    except (LidarlyError, ValidationError, ValueError, OSError) as exc:
        code = startup_exit_code(exc)
        print(dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}))
        return code

    reports: List[EvalReport] = []
    seeds: List[int] = []
    failures = 0
    for seed in args.seeds:
        for variant in args.variants:
            try:
                report = run_variant(scene, variant, seed, config)
            except LidarlyError as exc:
                failures += 1
                logger.error("❌ %s seed %d: %s", variant, seed, exc)
                continue
            logger.info("✅ %s seed %d: absrel_object=%s", variant, seed, report.absrel_object)
            reports.append(report)
            seeds.append(seed)

    write_reports_csv(args.out, reports, seeds)
    print(dumps({"csv": args.out, "failures": failures, "summary": summarize(reports)}))
    return 0 if failures == 0 else 3


if __name__ == "__main__":
    sys.exit(main())
