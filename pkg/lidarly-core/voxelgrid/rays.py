"""
Rewrite LiDAR ranges against an occupancy grid, and remove returns inside a box
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Literal, NamedTuple, Optional, Tuple

import numpy as np

from geometry.boxes import points_in_box
from models.geometry_models import BBox3D
from models.scan_models import NO_RETURN, LidarScan, RayUpdate, VoxelGrid
from utils.settings import get_settings
from voxelgrid.traversal import slab_intervals, walk_aligned

logger = logging.getLogger(__name__)

_CHUNK_RAYS = 2048


class RemovedReturns(NamedTuple):
    scan: LidarScan
    points: np.ndarray
    ray_indices: np.ndarray


def _first_occupied(grid: VoxelGrid, origin: np.ndarray, direction: np.ndarray, voxel_center_distance: bool) -> Optional[Tuple[Tuple[int, int, int], float]]:
    for hit in walk_aligned(grid, origin, direction):
        if grid.occupancy[hit.index]:
            if voxel_center_distance:
                lower, upper = grid.voxel_bounds(hit.index)
                return hit.index, float(np.linalg.norm((lower + upper) / 2.0 - origin))
            return hit.index, hit.t
    return None


def update_rays(
    scan: LidarScan,
    grid: VoxelGrid,
    voxel_center_distance: bool = False,
    threads: Optional[int] = None,
) -> Tuple[LidarScan, List[RayUpdate]]:
    """Pull each ray's range in to the first occupied voxel it crosses, unless an existing return is closer.

    The scan is in the world frame the grid's camera pose maps from. The input scan is left untouched.
    """
    frame = grid.frame
    rotation = frame.rotation @ frame.camera_pose.rotation
    origins = frame.align_world(scan.origins.astype(np.float64))
    directions = scan.directions.astype(np.float64) @ rotation.T
    old = scan.ranges

    t_enter, t_exit = slab_intervals(origins, directions, frame.delta_min, frame.delta_max)
    candidates = np.flatnonzero((t_enter <= t_exit) & (t_enter < old))
    if grid.occupied_count == 0:
        candidates = candidates[:0]

    def walk(chunk: np.ndarray) -> List[RayUpdate]:
        found = []
        for i in chunk:
            first = _first_occupied(grid, origins[i], directions[i], voxel_center_distance)
            if first is None:
                continue
            index, t = first
            stored = old.dtype.type(t)
            if not stored > 0:
                continue
            if np.isposinf(old[i]) or stored < old[i]:
                found.append(RayUpdate(ray_index=int(i), old_range=float(old[i]), new_range=float(stored), hit_voxel=index))
        return found

    chunks = [candidates[i:i + _CHUNK_RAYS] for i in range(0, candidates.size, _CHUNK_RAYS)]
    threads = threads or get_settings().threads
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(walk, chunks))
    else:
        results = [walk(c) for c in chunks]
    updates = [u for part in results for u in part]

    ranges = np.array(old, copy=True)
    for u in updates:
        ranges[u.ray_index] = u.new_range
    logger.debug("%d box-crossing rays, %d updated", int(candidates.size), len(updates))
    return scan.with_ranges(ranges), updates


def remove_points_in_box(
    scan: LidarScan,
    box: BBox3D,
    policy: Literal["no_return", "delete"] = "no_return",
) -> RemovedReturns:
    """Take out every return inside the box; the removed points become the ground truth for evaluation.

    With "no_return" the rays stay (ranges become NO_RETURN) so ray indices line up with the input;
    with "delete" the rays are dropped.
    """
    points = scan.points()
    inside = points_in_box(box, points)
    indices = np.flatnonzero(inside)
    if policy == "no_return":
        ranges = np.array(scan.ranges, copy=True)
        ranges[inside] = NO_RETURN
        new_scan = scan.with_ranges(ranges)
    elif policy == "delete":
        new_scan = scan.subset(~inside)
    else:
        raise ValueError(f"unknown removal policy: {policy}")
    logger.debug("removed %d returns inside the box (%s)", indices.size, policy)
    return RemovedReturns(scan=new_scan, points=points[inside], ray_indices=indices)
