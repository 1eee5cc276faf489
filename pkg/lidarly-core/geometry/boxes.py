"""
Box alignment frame and point-in-box tests
"""

import numpy as np

from models.geometry_models import BBox3D, BoxFrame, Camera


def box_frame(box: BBox3D, cam: Camera) -> BoxFrame:
    """R maps camera-frame directions onto the box axes; delta_min/max = R b -/+ b0 with b the camera-frame center"""
    rotation = (cam.pose.rotation @ box.orientation).T
    b = cam.to_camera(box.center)
    b0 = box.half_extent
    rb = rotation @ b
    return BoxFrame(rotation=rotation, delta_min=rb - b0, delta_max=rb + b0, half_extent=b0, camera_pose=cam.pose)


def points_in_box(box: BBox3D, points: np.ndarray) -> np.ndarray:
    """Vectorized point_in_box over (N, 3) points in the box's frame"""
    local = box.to_local(np.atleast_2d(points))
    return np.all(np.abs(local) <= box.half_extent, axis=1)


def point_in_box(box: BBox3D, p: np.ndarray) -> bool:
    return bool(points_in_box(box, np.asarray(p, dtype=np.float64).reshape(1, 3))[0])
