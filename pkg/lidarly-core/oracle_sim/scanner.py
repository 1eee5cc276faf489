"""
Simulated spinning LiDAR over analytic primitives
"""

import logging
from typing import Sequence

import numpy as np

from models.scan_models import NO_RETURN, LidarScan
from models.scene_models import Primitive, ScannerSpec
from oracle_sim.primitives import nearest_hit

logger = logging.getLogger(__name__)


def _cell_centers(lo: float, hi: float, count: int) -> np.ndarray:
    return lo + (np.arange(count) + 0.5) * (hi - lo) / count


def scanner_directions(spec: ScannerSpec) -> np.ndarray:
    """(E * A, 3) unit directions in the sensor frame; elevation rows, azimuth fastest"""
    azimuth = _cell_centers(*spec.azimuth_range, spec.azimuth_count)
    elevation = _cell_centers(*spec.elevation_range, spec.elevation_count)
    el, az = np.meshgrid(elevation, azimuth, indexing="ij")
    dirs = np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)
    return dirs.reshape(-1, 3)


def scan_scene(spec: ScannerSpec, primitives: Sequence[Primitive]) -> LidarScan:
    """One ray per (elevation, azimuth) cell; range is the nearest hit or NO_RETURN beyond max_range"""
    directions = spec.origin.rotate(scanner_directions(spec))
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    origins = np.broadcast_to(spec.origin.translation, directions.shape).copy()
    t, _ = nearest_hit(primitives, origins, directions)
    ranges = np.where(t <= spec.max_range, t, NO_RETURN)
    logger.debug("scanned %d rays, %d returns", ranges.size, int(np.isfinite(ranges).sum()))
    return LidarScan(origins=origins, directions=directions, ranges=ranges)
