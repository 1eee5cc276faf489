"""
Portable Float Map depth rasters ("Pf", one channel, rows stored bottom-up)
"""

import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from models.depth_models import DepthMap
from utils.errors import FormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_header_line(handle) -> str:
    line = handle.readline()
    if not line:
        raise FormatError("PFM header is truncated")
    return line.decode("ascii", errors="replace").strip()


def read_pfm_values(path: PathLike) -> np.ndarray:
    """(height, width) float32 values, top row first"""
    with open(path, "rb") as handle:
        magic = _read_header_line(handle)
        if magic != "Pf":
            raise FormatError(f"{path}: expected a one-channel 'Pf' file, got {magic!r}")
        try:
            width, height = (int(x) for x in _read_header_line(handle).split())
            scale = float(_read_header_line(handle))
        except ValueError as exc:
            raise FormatError(f"{path}: malformed PFM header") from exc
        if width <= 0 or height <= 0 or scale == 0.0:
            raise FormatError(f"{path}: invalid PFM dimensions or scale")
        dtype = "<f4" if scale < 0 else ">f4"
        data = handle.read()
    if len(data) < width * height * 4:
        raise FormatError(f"{path}: expected {width * height} floats, got {len(data) // 4}")
    values = np.frombuffer(data, dtype=dtype, count=width * height).reshape(height, width)
    return np.flipud(values).astype(np.float32)


def write_pfm_values(path: PathLike, values: np.ndarray) -> None:
    """Little-endian (scale -1) float32 raster"""
    values = np.asarray(values)
    if values.ndim != 2:
        raise FormatError("PFM rasters must be 2D")
    height, width = values.shape
    with open(path, "wb") as handle:
        handle.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
        handle.write(np.flipud(values).astype("<f4").tobytes())


def read_depth(path: PathLike, origin_offset: Tuple[float, float] = (0.0, 0.0), scale: float = 1.0, kind: str = "relative") -> DepthMap:
    values = read_pfm_values(path)
    if kind == "relative" and not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values.ravel()))[0])
        raise FormatError(f"{path}: relative depth must be finite", index=bad)
    logger.debug("read %dx%d depth from %s", values.shape[1], values.shape[0], path)
    return DepthMap(values=values.astype(np.float64), origin_offset=origin_offset, scale=scale, kind=kind)


def write_depth(path: PathLike, depth: DepthMap) -> None:
    write_pfm_values(path, depth.values)
