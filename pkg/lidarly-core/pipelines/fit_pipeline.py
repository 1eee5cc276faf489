"""
Depth fit pipeline: gradient filter -> background correspondences -> RANSAC -> box-constrained LP
"""

import logging
from typing import List, NamedTuple, Optional

from depthlift.correspondences import background_correspondences
from depthlift.filtering import default_gradient_threshold, depth_gradient_filter, invert_disparity, occluding_contour
from depthlift.lifting import pixel_samples, samples_inside_box, samples_viewing_box
from depthlift.ransac import ransac_affine_fit
from depthlift.scale_lp import refine_scale_lp
from geometry.boxes import box_frame
from models.config_models import PipelineConfig
from models.depth_models import AffineDepthParams, DepthMap, ObjectMask, PixelSampleSet
from models.geometry_models import BBox3D, BoxFrame, Camera
from models.report_models import FitReport, FitResult
from models.scan_models import LidarScan
from utils.errors import EmptyMask, Infeasible, Unbounded

logger = logging.getLogger(__name__)


class Refinement(NamedTuple):
    lp: Optional[AffineDepthParams]
    params: AffineDepthParams
    samples: PixelSampleSet
    recovery: Optional[str] = None
    dropped: int = 0


class FilteredMask(NamedTuple):
    mask: ObjectMask
    threshold: Optional[float]
    contour: int = 0


class DepthFitPipeline:
    """Estimates the affine map from relative to metric depth for one frame"""

    def __init__(self, config: PipelineConfig):
        self.config = config

    def prepare_depth(self, depth: DepthMap) -> DepthMap:
        return invert_disparity(depth) if self.config.invert_disparity else depth

    def filter_mask(self, depth: DepthMap, mask: ObjectMask, warnings: List[str]) -> FilteredMask:
        """Mask after the gradient filter, the threshold that was applied and how many contour pixels came back"""
        if self.config.skip_gradient_filter:
            return FilteredMask(mask, None)
        threshold = self.config.gradient_threshold or default_gradient_threshold(depth, mask)
        if threshold is None:
            warnings.append("relative depth is constant inside the mask; gradient filter skipped")
            return FilteredMask(mask, None)
        kept = depth_gradient_filter(depth, mask, threshold)
        if not self.config.keep_contour:
            return FilteredMask(kept, threshold)
        restored = occluding_contour(depth, mask, threshold).bits & ~kept.bits
        return FilteredMask(ObjectMask(bits=kept.bits | restored), threshold, int(restored.sum()))

    def refine(self, samples: PixelSampleSet, frame: BoxFrame, ransac: AffineDepthParams, warnings: List[str]) -> Refinement:
        """Box LP on the samples; with lp_fallback an infeasible or unbounded LP is recovered instead of raised"""
        try:
            lp = refine_scale_lp(samples, frame, ransac)
        except Infeasible as exc:
            if not self.config.lp_fallback:
                raise
            return self._refit_inside(samples, frame, ransac, warnings, exc)
        except Unbounded as exc:
            if not self.config.lp_fallback:
                raise
            return self._ransac_fallback(samples, ransac, warnings, exc)
        return Refinement(lp=lp, params=lp, samples=samples)

    def _refit_inside(self, samples: PixelSampleSet, frame: BoxFrame, ransac: AffineDepthParams,
                      warnings: List[str], exc: Infeasible) -> Refinement:
        # every remaining sample is inside the box at the RANSAC fit, so the LP is feasible again
        fitting, dropped = samples_inside_box(samples, ransac, frame)
        if len(fitting) == 0:
            raise Infeasible(f"{exc}; no sample lies inside the box at the RANSAC fit") from exc
        warnings.append(f"LP infeasible ({exc}); dropped {dropped} samples outside the box at the RANSAC fit")
        logger.warning("⚠️ LP infeasible, re-solving without %d of %d samples", dropped, len(samples))
        try:
            lp = refine_scale_lp(fitting, frame, ransac)
        except Unbounded as unbounded:
            return self._ransac_fallback(fitting, ransac, warnings, unbounded, dropped)
        return Refinement(lp=lp, params=lp, samples=fitting, recovery="dropped_samples", dropped=dropped)

    def _ransac_fallback(self, samples: PixelSampleSet, ransac: AffineDepthParams, warnings: List[str],
                         exc: Unbounded, dropped: int = 0) -> Refinement:
        warnings.append(f"LP unbounded ({exc}); using the RANSAC parameters")
        logger.warning("⚠️ LP unbounded, falling back to RANSAC alpha=%.6g beta=%.6g", ransac.alpha, ransac.beta)
        return Refinement(lp=None, params=ransac, samples=samples, recovery="ransac", dropped=dropped)

    def run(self, cam: Camera, scan: LidarScan, depth: DepthMap, mask: ObjectMask, box: BBox3D) -> FitResult:
        warnings: List[str] = []
        depth = self.prepare_depth(depth)
        kept, threshold, contour = self.filter_mask(depth, mask, warnings)

        pairs = background_correspondences(scan, cam, depth, mask)
        ransac = ransac_affine_fit(
            pairs,
            inlier_tol=self.config.ransac_tol,
            iterations=self.config.ransac_iterations,
            seed=self.config.ransac_seed,
            threads=self.config.threads,
        )

        frame = box_frame(box, cam)
        samples, off_box = samples_viewing_box(pixel_samples(depth, kept, cam, frame), frame)
        if off_box:
            warnings.append(f"{off_box} object pixels do not view the box and were ignored")
        if len(samples) == 0:
            raise EmptyMask("no object pixel views the box")

        refined = self.refine(samples, frame, ransac, warnings)
        report = FitReport(
            ransac=ransac,
            lp=refined.lp,
            used="lp" if refined.lp is not None else "ransac",
            gradient_threshold=threshold,
            mask_pixels=mask.area,
            kept_pixels=kept.area,
            contour_pixels=contour,
            off_box_pixels=off_box,
            lp_recovery=refined.recovery,
            lp_dropped_samples=refined.dropped,
            correspondences=len(pairs),
            warnings=warnings,
            config=self.config.knobs(),
        )
        logger.info("✅ fit: RANSAC alpha=%.6g beta=%.6g, used %s alpha=%.6g beta=%.6g",
                    ransac.alpha, ransac.beta, report.used, refined.params.alpha, refined.params.beta)
        return FitResult(report=report, params=refined.params, frame=frame, samples=refined.samples)
