"""
Pinhole projection of points and box corners
"""

from typing import Tuple

import numpy as np

from models.geometry_models import BBox3D, Camera
from utils.errors import BehindCamera

NEAR_PLANE = 0.1


def project_points(cam: Camera, points_world: np.ndarray, near: float = NEAR_PLANE) -> Tuple[np.ndarray, np.ndarray]:
    """Project (N, 3) world points; returns (N, 2) continuous pixels and (N,) camera-frame depths"""
    p_cam = cam.to_camera(np.atleast_2d(points_world))
    z = p_cam[:, 2]
    behind = np.flatnonzero(~(z > near))
    if behind.size:
        raise BehindCamera(f"point depth {z[behind[0]]:.6g} m is not beyond the near plane {near} m", index=int(behind[0]))
    u = cam.fx * p_cam[:, 0] / z + cam.cx
    v = cam.fy * p_cam[:, 1] / z + cam.cy
    return np.stack([u, v], axis=1), z


def project_point(cam: Camera, p_world: np.ndarray, near: float = NEAR_PLANE) -> Tuple[float, float, float]:
    """(u, v, z) for one world point"""
    uv, z = project_points(cam, np.asarray(p_world, dtype=np.float64).reshape(1, 3), near)
    return float(uv[0, 0]), float(uv[0, 1]), float(z[0])


def project_box_corners(cam: Camera, box: BBox3D, near: float = NEAR_PLANE) -> np.ndarray:
    """(8, 2) pixels in BBox3D corner order. Partially visible boxes are rejected, not clipped"""
    return project_points(cam, box.corners(), near)[0]
