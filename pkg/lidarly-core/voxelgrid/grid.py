"""
Occupancy grids over the box-aligned frame
"""

import logging
from typing import Tuple

import numpy as np
from scipy import ndimage

from models.geometry_models import BoxFrame
from models.scan_models import VoxelGrid

logger = logging.getLogger(__name__)

# points lifted onto an active box constraint can sit a rounding error outside
BOUNDARY_TOL = 1e-6


def voxel_indices(aligned: np.ndarray, frame: BoxFrame, resolution: Tuple[int, int, int]) -> np.ndarray:
    """floor((R p - delta_min) / voxel_size), clamped so points on delta_max land in the last cell"""
    counts = np.asarray(resolution, dtype=np.int64)
    size = (frame.delta_max - frame.delta_min) / counts
    idx = np.floor((aligned - frame.delta_min) / size).astype(np.int64)
    return np.clip(idx, 0, counts - 1)


def voxelize_points(points: np.ndarray, frame: BoxFrame, resolution: Tuple[int, int, int]) -> VoxelGrid:
    """Mark every voxel holding at least one camera-frame point; points outside the box are dropped and counted"""
    resolution = tuple(int(n) for n in resolution)
    occupancy = np.zeros(resolution, dtype=bool)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    aligned = frame.align(points)
    inside = frame.contains_aligned(aligned, tol=BOUNDARY_TOL)
    dropped = int(points.shape[0] - np.count_nonzero(inside))
    if dropped:
        logger.debug("%d of %d points fall outside the box", dropped, points.shape[0])
    idx = voxel_indices(aligned[inside], frame, resolution)
    occupancy[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    return VoxelGrid(frame=frame, resolution=resolution, occupancy=occupancy, dropped_points=dropped)


def ball_structure(radius: int) -> np.ndarray:
    """Voxel offsets within Euclidean distance radius of the center"""
    r = np.arange(-radius, radius + 1)
    x, y, z = np.meshgrid(r, r, r, indexing="ij")
    return x * x + y * y + z * z <= radius * radius


def dilate_occupancy(grid: VoxelGrid, radius: int) -> VoxelGrid:
    """Grow occupied cells by a ball of the given voxel radius; radius 0 returns the grid as is"""
    if radius < 0:
        raise ValueError("dilation radius must be >= 0")
    if radius == 0 or grid.occupied_count == 0:
        return grid
    dilated = ndimage.binary_dilation(grid.occupancy, structure=ball_structure(radius))
    logger.debug("dilation r=%d: %d -> %d voxels", radius, grid.occupied_count, int(dilated.sum()))
    return grid.with_occupancy(dilated)
