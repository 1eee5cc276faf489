"""
RoI masks from projected boxes, and the square crop bookkeeping around them.

Pixel (u, v) samples the continuous point (u + 0.5, v + 0.5).
"""

import logging
from typing import Dict, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from geometry.projection import NEAR_PLANE, project_box_corners
from models.depth_models import ObjectMask
from models.geometry_models import BBox3D, BoxTrack, Camera, CropWindow
from utils.errors import BehindCamera, EmptyMask

logger = logging.getLogger(__name__)


def convex_hull_polygon(points: np.ndarray) -> np.ndarray:
    """Hull vertices in scipy's counter-clockwise order"""
    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise EmptyMask(f"projected box hull is degenerate: {exc}") from exc
    return points[hull.vertices]


def polygon_area_centroid(polygon: np.ndarray) -> Tuple[float, np.ndarray]:
    x, y = polygon[:, 0], polygon[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2.0
    if area == 0.0:
        return 0.0, polygon.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return abs(area), np.array([cx, cy])


def dilate_polygon(polygon: np.ndarray, enlarge_pct: float) -> np.ndarray:
    """Scale vertices about the area centroid by (1 + enlarge_pct)"""
    _, centroid = polygon_area_centroid(polygon)
    return centroid + (polygon - centroid) * (1.0 + enlarge_pct)


def rasterize_convex_polygon(polygon: np.ndarray, width: int, height: int) -> np.ndarray:
    """Half-plane test of every pixel center against a convex polygon (any winding)"""
    bits = np.zeros((height, width), dtype=bool)
    u_lo = max(int(np.floor(polygon[:, 0].min())), 0)
    u_hi = min(int(np.ceil(polygon[:, 0].max())), width - 1)
    v_lo = max(int(np.floor(polygon[:, 1].min())), 0)
    v_hi = min(int(np.ceil(polygon[:, 1].max())), height - 1)
    if u_lo > u_hi or v_lo > v_hi:
        return bits
    uu, vv = np.meshgrid(np.arange(u_lo, u_hi + 1) + 0.5, np.arange(v_lo, v_hi + 1) + 0.5)
    sign = 1.0 if _signed_area(polygon) > 0 else -1.0
    inside = np.ones(uu.shape, dtype=bool)
    for a, b in zip(polygon, np.roll(polygon, -1, axis=0)):
        edge = b - a
        cross = edge[0] * (vv - a[1]) - edge[1] * (uu - a[0])
        inside &= sign * cross >= 0.0
    bits[v_lo:v_hi + 1, u_lo:u_hi + 1] = inside
    return bits


def _signed_area(polygon: np.ndarray) -> float:
    x, y = polygon[:, 0], polygon[:, 1]
    return float((x * np.roll(y, -1) - np.roll(x, -1) * y).sum() / 2.0)


def _mark_pixels(bits: np.ndarray, points: np.ndarray) -> None:
    height, width = bits.shape
    cols = np.floor(points[:, 0]).astype(np.int64)
    rows = np.floor(points[:, 1]).astype(np.int64)
    ok = (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
    bits[rows[ok], cols[ok]] = True


def roi_mask_from_box(cam: Camera, box: BBox3D, enlarge_pct: float = 0.10, near: float = NEAR_PLANE) -> ObjectMask:
    """Filled hull of the 8 projected corners, dilated about its centroid, clipped to the image.

    Pixels that contain a projected corner are always part of the mask.
    """
    if enlarge_pct < 0:
        raise ValueError("enlarge_pct must be >= 0")
    corners = project_box_corners(cam, box, near)
    polygon = convex_hull_polygon(corners)
    area, _ = polygon_area_centroid(polygon)
    if area < 1.0:
        raise EmptyMask(f"projected hull area {area:.3g} px is below one pixel")
    polygon = dilate_polygon(polygon, enlarge_pct)
    bits = rasterize_convex_polygon(polygon, cam.width, cam.height)
    _mark_pixels(bits, corners)
    if not bits.any():
        raise EmptyMask("projected box does not cover any pixel of the image")
    return ObjectMask(bits=bits)


def rect_mask_from_box(cam: Camera, box: BBox3D, enlarge_pct: float = 0.10, near: float = NEAR_PLANE) -> ObjectMask:
    """Axis-aligned 2D box around the projected corners, enlarged about its center"""
    corners = project_box_corners(cam, box, near)
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    center, half = (lo + hi) / 2.0, (hi - lo) / 2.0 * (1.0 + enlarge_pct)
    if np.prod(2.0 * half) < 1.0:
        raise EmptyMask("projected box is smaller than one pixel")
    polygon = np.array([
        center + [-half[0], -half[1]], center + [half[0], -half[1]],
        center + [half[0], half[1]], center + [-half[0], half[1]],
    ])
    bits = rasterize_convex_polygon(polygon, cam.width, cam.height)
    _mark_pixels(bits, corners)
    if not bits.any():
        raise EmptyMask("projected box does not cover any pixel of the image")
    return ObjectMask(bits=bits)


def roi_masks_for_track(cam: Camera, track: BoxTrack, enlarge_pct: float = 0.10) -> Dict[int, ObjectMask]:
    """Mask per frame; frames whose box is not fully projectable are skipped with a warning"""
    masks: Dict[int, ObjectMask] = {}
    for item in track.frames:
        try:
            masks[item.frame] = roi_mask_from_box(cam, item.box, enlarge_pct)
        except (BehindCamera, EmptyMask) as exc:
            logger.warning("⚠️ frame %d skipped: %s", item.frame, exc)
    return masks


def square_crop_for_mask(mask: ObjectMask, target: int = 512) -> CropWindow:
    """Square crop enclosing the mask's bounding box, shifted inward to stay inside the image"""
    if mask.area == 0:
        raise EmptyMask("cannot crop around an empty mask")
    x_min, y_min, x_max, y_max = mask.bounding_box()
    w, h = x_max - x_min + 1, y_max - y_min + 1
    side = max(w, h)
    encloses = True
    if side > min(mask.width, mask.height):
        logger.warning("⚠️ mask bbox %dx%d does not fit a square inside %dx%d", w, h, mask.width, mask.height)
        side = min(mask.width, mask.height)
        encloses = False
    x0 = x_min - (side - w) // 2
    y0 = y_min - (side - h) // 2
    x0 = int(np.clip(x0, 0, mask.width - side))
    y0 = int(np.clip(y0, 0, mask.height - side))
    return CropWindow(x0=x0, y0=y0, side=side, target=target, encloses_mask=encloses)
