"""
Object-pixel filtering by relative-depth gradients
"""

import logging
from typing import Optional

import numpy as np

from models.depth_models import DepthMap, ObjectMask
from utils.errors import ConfigError, DimensionMismatch

logger = logging.getLogger(__name__)

AUTO_THRESHOLD_FRACTION = 0.05
# a sphere limb steps about 4x the default threshold per pixel
CONTOUR_STEP_FACTOR = 6.0


def _check_dims(depth: DepthMap, mask: ObjectMask) -> None:
    if depth.values.shape != mask.bits.shape:
        raise DimensionMismatch(
            f"depth raster is {depth.width}x{depth.height} but mask is {mask.width}x{mask.height}"
        )


def gradient_magnitude(values: np.ndarray) -> np.ndarray:
    """Central differences inside, one-sided differences on the border"""
    values = np.asarray(values, dtype=np.float64)
    gy = np.gradient(values, axis=0) if values.shape[0] > 1 else np.zeros_like(values)
    gx = np.gradient(values, axis=1) if values.shape[1] > 1 else np.zeros_like(values)
    return np.hypot(gx, gy)


def default_gradient_threshold(depth: DepthMap, mask: ObjectMask) -> Optional[float]:
    """0.05 x (max - min relative depth inside the mask); None when that range is zero"""
    _check_dims(depth, mask)
    inside = depth.values[mask.bits]
    if inside.size == 0:
        return None
    spread = float(inside.max()) - float(inside.min())
    return AUTO_THRESHOLD_FRACTION * spread if spread > 0 else None


def depth_gradient_filter(depth: DepthMap, mask: ObjectMask, threshold: float) -> ObjectMask:
    """Drop mask pixels whose gradient magnitude exceeds the threshold"""
    _check_dims(depth, mask)
    if not threshold > 0:
        raise ConfigError(f"gradient threshold must be positive, got {threshold}")
    keep = mask.bits & (gradient_magnitude(depth.values) <= threshold)
    logger.debug("gradient filter kept %d of %d pixels", int(keep.sum()), mask.area)
    return ObjectMask(bits=keep)


def _neighbor(values: np.ndarray, dy: int, dx: int, fill) -> np.ndarray:
    """values[y + dy, x + dx] at every pixel, fill where that falls off the raster"""
    h, w = values.shape
    out = np.full(values.shape, fill, dtype=values.dtype)
    out[max(-dy, 0):h - max(dy, 0), max(-dx, 0):w - max(dx, 0)] = values[max(dy, 0):h - max(-dy, 0), max(dx, 0):w - max(-dx, 0)]
    return out


def occluding_contour(depth: DepthMap, mask: ObjectMask, threshold: float,
                      step_factor: float = CONTOUR_STEP_FACTOR) -> ObjectMask:
    """Mask pixels on the silhouette of a surface that occludes what lies behind it.

    A pixel qualifies when it has a 4-neighbor outside the mask, every such neighbor is farther by more
    than threshold, and no 4-neighbor inside the mask differs from it by more than step_factor x threshold.
    Leaked background and blurred rims fail the last two tests.
    """
    _check_dims(depth, mask)
    if not threshold > 0:
        raise ConfigError(f"gradient threshold must be positive, got {threshold}")
    values = np.asarray(depth.values, dtype=np.float64)
    bits = mask.bits
    in_raster = np.ones(bits.shape, dtype=bool)
    touches = np.zeros(bits.shape, dtype=bool)
    occludes = np.ones(bits.shape, dtype=bool)
    smooth = np.ones(bits.shape, dtype=bool)
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        other = _neighbor(values, dy, dx, 0.0)
        inside = _neighbor(bits, dy, dx, False)
        outside = _neighbor(in_raster, dy, dx, False) & ~inside
        touches |= outside
        occludes &= ~outside | (other - values > threshold)
        smooth &= ~inside | (np.abs(other - values) <= step_factor * threshold)
    contour = bits & touches & occludes & smooth
    logger.debug("occluding contour: %d of %d mask pixels", int(contour.sum()), mask.area)
    return ObjectMask(bits=contour)


def invert_disparity(disparity: DepthMap, min_disparity: float = 1e-6) -> DepthMap:
    """Relative depth = 1 / disparity, with disparity clamped away from zero"""
    values = 1.0 / np.maximum(np.asarray(disparity.values, dtype=np.float64), min_disparity)
    return disparity.with_values(values.astype(disparity.values.dtype))
