"""
Pipeline utility functions: load the files a PipelineConfig points at
"""

import logging
from typing import NamedTuple

from formats.json_io import read_box_track, read_calibration, read_crop
from formats.lray import read_lray
from formats.pfm import read_depth
from formats.pgm import read_pgm
from models.config_models import PipelineConfig
from models.depth_models import DepthMap, ObjectMask
from models.geometry_models import BBox3D, Camera
from models.scan_models import LidarScan
from utils.errors import ConfigError, DimensionMismatch

logger = logging.getLogger(__name__)


class PipelineInputs(NamedTuple):
    camera: Camera
    scan: LidarScan
    depth: DepthMap
    mask: ObjectMask
    box: BBox3D
    frame: int


def load_pipeline_inputs(config: PipelineConfig) -> PipelineInputs:
    """Read calibration, scan, depth (placed by the optional crop), mask and the chosen box"""
    missing = [name for name in ("calibration", "scan", "depth", "mask", "boxes") if getattr(config, name) is None]
    if missing:
        raise ConfigError(f"missing input files: {', '.join(missing)}")
    camera = read_calibration(config.calibration)
    scan = read_lray(config.scan)
    if config.crop is not None:
        crop = read_crop(config.crop)
        depth = read_depth(config.depth, origin_offset=(float(crop.x0), float(crop.y0)), scale=crop.scale)
    else:
        depth = read_depth(config.depth)
    mask = read_pgm(config.mask)
    if mask.bits.shape != depth.values.shape:
        raise DimensionMismatch(f"mask is {mask.width}x{mask.height}, depth is {depth.width}x{depth.height}")
    track = read_box_track(config.boxes)
    frame = config.frame if config.frame is not None else track.frames[0].frame
    try:
        box = track.box_at(frame)
    except KeyError as exc:
        raise ConfigError(f"frame {frame} is not in the box track") from exc
    logger.debug("loaded %d rays, %dx%d depth, frame %d", len(scan), depth.width, depth.height, frame)
    return PipelineInputs(camera=camera, scan=scan, depth=depth, mask=mask, box=box, frame=frame)
