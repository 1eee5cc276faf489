"""
Binary ray scans (.lray).

    16 bytes  magic b"LIDARLY\\0" + u32 version + u32 reserved (little-endian)
     8 bytes  u64 ray count
    N x 28    origin xyz, direction xyz, range as little-endian f32; range +inf = NO_RETURN
"""

import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from models.scan_models import LidarScan
from utils.errors import FormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MAGIC = b"LIDARLY\x00"
VERSION = 1
_HEADER = struct.Struct("<8sII")
_COUNT = struct.Struct("<Q")
_RECORD = np.dtype("<f4")


def read_lray(path: PathLike) -> LidarScan:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + _COUNT.size:
        raise FormatError(f"{path}: file is shorter than the .lray header")
    magic, version, _ = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: not a .lray file")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported .lray version {version}")
    (count,) = _COUNT.unpack_from(data, _HEADER.size)
    offset = _HEADER.size + _COUNT.size
    if len(data) - offset != count * 7 * _RECORD.itemsize:
        raise FormatError(f"{path}: header says {count} rays but payload holds {(len(data) - offset) / 28:g}")
    records = np.frombuffer(data, dtype=_RECORD, offset=offset).reshape(-1, 7).astype(np.float32)
    try:
        scan = LidarScan(origins=records[:, 0:3], directions=records[:, 3:6], ranges=records[:, 6])
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc.errors()[0]['msg']}") from exc
    logger.debug("read %d rays from %s", count, path)
    return scan


def write_lray(path: PathLike, scan: LidarScan) -> None:
    records = np.empty((len(scan), 7), dtype=_RECORD)
    records[:, 0:3] = scan.origins
    records[:, 3:6] = scan.directions
    records[:, 6] = scan.ranges
    with open(path, "wb") as handle:
        handle.write(_HEADER.pack(MAGIC, VERSION, 0))
        handle.write(_COUNT.pack(len(scan)))
        handle.write(records.tobytes())
