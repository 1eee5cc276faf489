"""
Object pixels -> box-aligned samples -> metric camera-frame points
"""

import logging
from typing import Tuple

import numpy as np

from models.depth_models import AffineDepthParams, DepthMap, ObjectMask, PixelSampleSet, SampleInput, as_sample_set
from models.geometry_models import BoxFrame, Camera
from utils.errors import DimensionMismatch, NonPositiveDepth
from voxelgrid.traversal import slab_intervals

logger = logging.getLogger(__name__)


def pixel_samples(depth: DepthMap, mask: ObjectMask, cam: Camera, frame: BoxFrame) -> PixelSampleSet:
    """One sample per mask pixel, at the pixel center mapped back to full-frame coordinates.

    Samples whose full-frame position falls outside the camera image are skipped.
    """
    if depth.values.shape != mask.bits.shape:
        raise DimensionMismatch("mask must annotate the depth raster")
    rows, cols = np.nonzero(mask.bits)
    u, v = depth.to_full_frame(cols + 0.5, rows + 0.5)
    inside = (u >= 0) & (u < cam.width) & (v >= 0) & (v < cam.height)
    if not inside.all():
        logger.debug("%d mask pixels fall outside the camera image", int((~inside).sum()))
    u, v = u[inside], v[inside]
    d = np.asarray(depth.values[rows[inside], cols[inside]], dtype=np.float64)
    X = cam.unproject(u, v) @ frame.rotation.T
    return PixelSampleSet(u=u, v=v, d=d, X=X.reshape(-1, 3))


def lift_pixels(samples: SampleInput, params: AffineDepthParams, cam: Camera) -> np.ndarray:
    """(N, 3) camera-frame points K^-1 [u, v, 1] * (alpha * d + beta), in sample order"""
    samples = as_sample_set(samples)
    z = params.alpha * samples.d + params.beta
    bad = np.flatnonzero(~(z > 0))
    if bad.size:
        raise NonPositiveDepth(f"lifted depth {z[bad[0]]:.6g} m is not positive", index=int(bad[0]))
    return cam.unproject(samples.u, samples.v) * z[:, None]


def samples_viewing_box(samples: SampleInput, frame: BoxFrame) -> Tuple[PixelSampleSet, int]:
    """Keep samples whose camera ray enters the box; no depth could place the others inside it"""
    samples = as_sample_set(samples)
    # the camera center is the origin of the aligned frame, and t along X is the camera depth
    t_enter, t_exit = slab_intervals(np.zeros_like(samples.X), samples.X, frame.delta_min, frame.delta_max)
    return _keep(samples, (t_enter <= t_exit) & (t_exit > 0))


def samples_inside_box(samples: SampleInput, params: AffineDepthParams, frame: BoxFrame) -> Tuple[PixelSampleSet, int]:
    """Keep samples whose lifted point lies inside the box under params"""
    samples = as_sample_set(samples)
    aligned = samples.X * (params.alpha * samples.d + params.beta)[:, None]
    return _keep(samples, frame.contains_aligned(aligned))


def _keep(samples: PixelSampleSet, keep: np.ndarray) -> Tuple[PixelSampleSet, int]:
    dropped = int(np.count_nonzero(~keep))
    if dropped == 0:
        return samples, 0
    return PixelSampleSet(u=samples.u[keep], v=samples.v[keep], d=samples.d[keep], X=samples.X[keep]), dropped
