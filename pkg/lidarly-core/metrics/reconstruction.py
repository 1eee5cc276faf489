"""
Reconstruction errors between a ground-truth scan and an inpainted scan sharing one ray grid
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, Literal, NamedTuple, Optional, Sequence, Union

import numpy as np

from geometry.boxes import points_in_box
from models.geometry_models import BBox3D
from models.report_models import EvalReport
from models.scan_models import LidarScan
from utils.errors import GridMismatch, LengthMismatch, NonPositiveDenominator

logger = logging.getLogger(__name__)

Denominator = Literal["reconstructed", "ground_truth"]
GRID_TOL = 1e-6


def _paired(a: Any, b: Any, width: Optional[int] = None) -> tuple:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if width is not None:
        a, b = a.reshape(-1, width), b.reshape(-1, width)
    if a.shape[0] != b.shape[0]:
        raise LengthMismatch(f"{a.shape[0]} ground-truth values vs {b.shape[0]} reconstructed")
    if a.shape[0] == 0:
        raise LengthMismatch("need at least one pair")
    return a, b


def absrel(gt_ranges: Any, rec_ranges: Any, denominator: Denominator = "reconstructed") -> float:
    """mean |d* - d| / d with d the reconstructed range, or d* when denominator='ground_truth'"""
    gt, rec = _paired(gt_ranges, rec_ranges)
    denom = rec if denominator == "reconstructed" else gt
    bad = np.flatnonzero(~(denom > 0))
    if bad.size:
        raise NonPositiveDenominator(f"{denominator} range {denom[bad[0]]:.6g} is not positive", index=int(bad[0]))
    return float(np.sum(np.abs(gt - rec) / denom) / gt.shape[0])


def l2_error(gt_points: Any, rec_points: Any) -> float:
    """Mean Euclidean distance between index-aligned points"""
    gt, rec = _paired(gt_points, rec_points, width=3)
    return float(np.sum(np.linalg.norm(gt - rec, axis=1)) / gt.shape[0])


class RayMatch(NamedTuple):
    all_rays: np.ndarray
    object_rays: np.ndarray
    missed_rays: np.ndarray
    missed_object_rays: np.ndarray


def match_by_ray(gt_scan: LidarScan, rec_scan: LidarScan, box: BBox3D) -> RayMatch:
    """Pair rays where both scans have a return; the object subset is rays whose ground-truth return is in the box"""
    if len(gt_scan) != len(rec_scan):
        raise GridMismatch(f"ground truth has {len(gt_scan)} rays, reconstruction {len(rec_scan)}")
    for name in ("origins", "directions"):
        a = getattr(gt_scan, name).astype(np.float64)
        b = getattr(rec_scan, name).astype(np.float64)
        off = np.flatnonzero(np.any(np.abs(a - b) > GRID_TOL, axis=1))
        if off.size:
            raise GridMismatch(f"ray {name} differ", index=int(off[0]))
    gt_hit, rec_hit = gt_scan.has_return, rec_scan.has_return
    in_box = np.zeros(len(gt_scan), dtype=bool)
    in_box[gt_hit] = points_in_box(box, gt_scan.points()[gt_hit])
    matched = gt_hit & rec_hit
    missed = gt_hit ^ rec_hit
    return RayMatch(
        all_rays=np.flatnonzero(matched),
        object_rays=np.flatnonzero(matched & in_box),
        missed_rays=np.flatnonzero(missed),
        missed_object_rays=np.flatnonzero(missed & in_box),
    )


def evaluate(
    gt_scan: LidarScan,
    rec_scan: LidarScan,
    box: BBox3D,
    denominator: Denominator = "reconstructed",
    variant: Optional[str] = None,
    config: Optional[Dict[str, Any]] = None,
) -> EvalReport:
    """Object and all-ray errors; means skip missed rays, which are counted instead"""
    match = match_by_ray(gt_scan, rec_scan, box)
    gt_ranges = gt_scan.ranges.astype(np.float64)
    rec_ranges = rec_scan.ranges.astype(np.float64)
    gt_points, rec_points = gt_scan.points(), rec_scan.points()

    def errors(rays: np.ndarray) -> tuple:
        if rays.size == 0:
            return None, None
        return (absrel(gt_ranges[rays], rec_ranges[rays], denominator),
                l2_error(gt_points[rays], rec_points[rays]))

    absrel_all, l2_all = errors(match.all_rays)
    absrel_object, l2_object = errors(match.object_rays)
    considered = match.all_rays.size + match.missed_rays.size
    report = EvalReport(
        absrel_object=absrel_object,
        absrel_all=absrel_all,
        l2_object=l2_object,
        l2_all=l2_all,
        matched_rays=int(match.all_rays.size),
        object_rays=int(match.object_rays.size),
        missed_rays=int(match.missed_rays.size),
        missed_object_rays=int(match.missed_object_rays.size),
        miss_rate=match.missed_rays.size / considered if considered else 0.0,
        absrel_denominator=denominator,
        variant=variant,
        config=config or {},
    )
    logger.debug("evaluated %d matched rays (%d object, %d missed)", report.matched_rays, report.object_rays, report.missed_rays)
    return report


REPORT_COLUMNS = [
    "variant", "seed", "absrel_object", "absrel_all", "l2_object", "l2_all",
    "matched_rays", "object_rays", "missed_rays", "missed_object_rays", "miss_rate", "absrel_denominator",
]


def write_reports_csv(path: Union[str, Path], reports: Sequence[EvalReport], seeds: Optional[Sequence[int]] = None) -> None:
    """One row per report, in the given order"""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for i, report in enumerate(reports):
            row = {key: getattr(report, key) for key in REPORT_COLUMNS if key != "seed"}
            row["seed"] = seeds[i] if seeds is not None else ""
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
