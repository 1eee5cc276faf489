"""
Ground-truth depth rendering through the pinhole camera
"""

from typing import Sequence, Tuple

import numpy as np

from models.depth_models import DepthMap
from models.geometry_models import Camera
from models.scene_models import Primitive
from oracle_sim.primitives import nearest_hit


def render_labels(cam: Camera, primitives: Sequence[Primitive]) -> Tuple[np.ndarray, np.ndarray]:
    """Per-pixel camera-frame depth (+inf on a miss) and index of the primitive seen (-1 on a miss)"""
    v, u = np.mgrid[0:cam.height, 0:cam.width]
    # z = 1 in the camera frame, so the hit parameter is the camera-frame depth
    rays = cam.unproject(u.ravel() + 0.5, v.ravel() + 0.5)
    directions = rays @ cam.pose.rotation
    origins = np.broadcast_to(cam.center_world, directions.shape)
    depth, which = nearest_hit(primitives, origins, directions)
    return depth.reshape(cam.height, cam.width), which.reshape(cam.height, cam.width)


def render_depth(cam: Camera, primitives: Sequence[Primitive]) -> DepthMap:
    depth, _ = render_labels(cam, primitives)
    return DepthMap(values=depth, kind="metric")
