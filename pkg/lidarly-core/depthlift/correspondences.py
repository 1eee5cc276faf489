"""
Background LiDAR / relative-depth pairs
"""

import logging

import numpy as np

from geometry.projection import NEAR_PLANE
from models.depth_models import CorrespondenceSet, DepthMap, ObjectMask
from models.geometry_models import Camera
from models.scan_models import LidarScan
from utils.errors import DimensionMismatch, TooFewCorrespondences

logger = logging.getLogger(__name__)


def background_correspondences(
    scan: LidarScan,
    cam: Camera,
    depth: DepthMap,
    object_mask: ObjectMask,
    near: float = NEAR_PLANE,
) -> CorrespondenceSet:
    """Pair each LiDAR return that lands on the depth raster, outside the object, with the nearest pixel's depth"""
    if depth.values.shape != object_mask.bits.shape:
        raise DimensionMismatch("object mask must annotate the depth raster")
    has_return = scan.has_return
    p_cam = cam.to_camera(scan.points()[has_return])
    z = p_cam[:, 2]
    front = z > near
    p_cam, z = p_cam[front], z[front]
    u = cam.fx * p_cam[:, 0] / z + cam.cx
    v = cam.fy * p_cam[:, 1] / z + cam.cy
    in_image = (u >= 0) & (u < cam.width) & (v >= 0) & (v < cam.height)
    ru, rv = depth.to_raster(u[in_image], v[in_image])
    z = z[in_image]
    cols = np.floor(ru).astype(np.int64)
    rows = np.floor(rv).astype(np.int64)
    on_raster = (cols >= 0) & (cols < depth.width) & (rows >= 0) & (rows < depth.height)
    cols, rows, z = cols[on_raster], rows[on_raster], z[on_raster]
    background = ~object_mask.bits[rows, cols]
    cols, rows, z = cols[background], rows[background], z[background]
    logger.debug("%d returns, %d on raster, %d background", int(has_return.sum()), int(on_raster.sum()), int(z.size))
    if z.size < 2:
        raise TooFewCorrespondences(f"only {z.size} background LiDAR returns land on the depth raster")
    d = np.asarray(depth.values[rows, cols], dtype=np.float64)
    return CorrespondenceSet(d=d, z=z)
