"""
Ray / box slab tests and the voxel walk (Amanatides & Woo) in the box-aligned frame
"""

from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from models.scan_models import VoxelGrid


class VoxelHit(NamedTuple):
    index: Tuple[int, int, int]
    t: float


def slab_intervals(origins: np.ndarray, directions: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-ray (t_enter, t_exit) against the box [lo, hi]; t_enter is clamped to 0, a miss has t_enter > t_exit"""
    origins = np.atleast_2d(origins)
    directions = np.atleast_2d(directions)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / directions
        t_lo = (lo - origins) * inv
        t_hi = (hi - origins) * inv
    t_near = np.minimum(t_lo, t_hi)
    t_far = np.maximum(t_lo, t_hi)
    # axis-parallel rays: inside the slab means unbounded on that axis, outside means a miss
    parallel = directions == 0.0
    inside_slab = (origins >= lo) & (origins <= hi)
    t_near = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), t_near)
    t_far = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), t_far)
    t_enter = np.maximum(t_near.max(axis=1), 0.0)
    t_exit = t_far.min(axis=1)
    return t_enter, t_exit


def slab_interval(origin: np.ndarray, direction: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> Optional[Tuple[float, float]]:
    t_enter, t_exit = slab_intervals(origin.reshape(1, 3), direction.reshape(1, 3), lo, hi)
    if t_enter[0] > t_exit[0]:
        return None
    return float(t_enter[0]), float(t_exit[0])


def walk_aligned(grid: VoxelGrid, origin: np.ndarray, direction: np.ndarray) -> List[VoxelHit]:
    """Voxels crossed by a ray already expressed in the box-aligned frame, in increasing t"""
    lo, hi = grid.frame.delta_min, grid.frame.delta_max
    span = slab_interval(origin, direction, lo, hi)
    if span is None:
        return []
    t, t_exit = span
    counts = list(grid.resolution)
    size = grid.voxel_size.tolist()
    entry = origin + t * direction
    idx = np.clip(np.floor((entry - lo) / size).astype(np.int64), 0, np.asarray(counts) - 1).tolist()

    step = [0, 0, 0]
    t_max = [np.inf, np.inf, np.inf]
    t_delta = [np.inf, np.inf, np.inf]
    for k in range(3):
        dk = float(direction[k])
        if dk != 0.0:
            step[k] = 1 if dk > 0 else -1
            boundary = float(lo[k]) + (idx[k] + (1 if dk > 0 else 0)) * size[k]
            t_max[k] = (boundary - float(origin[k])) / dk
            t_delta[k] = size[k] / abs(dk)

    hits: List[VoxelHit] = []
    for _ in range(sum(counts) + 3):
        hits.append(VoxelHit((idx[0], idx[1], idx[2]), t))
        k = min(range(3), key=t_max.__getitem__)
        t_next = t_max[k]
        if t_next > t_exit:
            break
        idx[k] += step[k]
        if idx[k] < 0 or idx[k] >= counts[k]:
            break
        t = max(t, t_next)
        t_max[k] += t_delta[k]
    return hits


def traverse(grid: VoxelGrid, origin: np.ndarray, direction: np.ndarray) -> List[VoxelHit]:
    """Every voxel a camera-frame ray passes through, in order, each with its entry distance (meters)"""
    rotation = grid.frame.rotation
    origin = rotation @ np.asarray(origin, dtype=np.float64)
    direction = rotation @ np.asarray(direction, dtype=np.float64)
    return walk_aligned(grid, origin, direction)
