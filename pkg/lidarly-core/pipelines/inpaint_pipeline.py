"""
Inpaint pipeline: fit -> lift -> voxelize -> rewrite ray ranges
"""

import logging
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict

from depthlift.lifting import lift_pixels
from models.config_models import PipelineConfig
from models.depth_models import DepthMap, ObjectMask
from models.geometry_models import BBox3D, Camera
from models.report_models import FitResult, InpaintReport
from models.scan_models import LidarScan, RayUpdate, VoxelGrid
from pipelines.fit_pipeline import DepthFitPipeline
from voxelgrid.grid import dilate_occupancy, voxelize_points
from voxelgrid.rays import update_rays

logger = logging.getLogger(__name__)


class InpaintResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scan: LidarScan
    updates: List[RayUpdate]
    points_world: np.ndarray
    grid: VoxelGrid
    fit: FitResult
    report: InpaintReport


class InpaintPipeline:
    """Inserts the lifted object into a scan; the input scan is never modified"""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.fit_pipeline = DepthFitPipeline(config)

    def run(self, cam: Camera, scan: LidarScan, depth: DepthMap, mask: ObjectMask, box: BBox3D) -> InpaintResult:
        fit = self.fit_pipeline.run(cam, scan, depth, mask, box)
        points = lift_pixels(fit.samples, fit.params, cam)
        grid = voxelize_points(points, fit.frame, self.config.voxel_resolution)
        grid = dilate_occupancy(grid, self.config.dilation_radius)
        new_scan, updates = update_rays(
            scan, grid,
            voxel_center_distance=self.config.voxel_center_distance,
            threads=self.config.threads,
        )
        report = InpaintReport(
            fit=fit.report,
            lifted_points=int(points.shape[0]),
            dropped_points=grid.dropped_points,
            occupied_voxels=grid.occupied_count,
            updated_rays=len(updates),
            config=self.config.knobs(),
        )
        logger.info("✅ inpaint: %d points, %d voxels, %d rays updated", report.lifted_points, report.occupied_voxels, report.updated_rays)
        return InpaintResult(
            scan=new_scan,
            updates=updates,
            points_world=cam.pose.inverse().apply(points),
            grid=grid,
            fit=fit,
            report=report,
        )
