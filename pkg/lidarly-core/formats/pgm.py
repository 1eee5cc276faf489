"""
Binary PGM (P5) masks, 255 = object
"""

from pathlib import Path
from typing import List, Union

import numpy as np

from models.depth_models import ObjectMask
from utils.errors import FormatError

PathLike = Union[str, Path]


def _header_tokens(data: bytes, count: int) -> tuple:
    """First `count` whitespace-separated header tokens (comments skipped) and the offset after them"""
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("PGM header is truncated")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_pgm(path: PathLike) -> ObjectMask:
    data = Path(path).read_bytes()
    tokens, offset = _header_tokens(data, 4)
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: expected binary PGM (P5), got {tokens[0]!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise FormatError(f"{path}: invalid PGM dimensions or maxval")
    dtype = np.uint8 if maxval < 256 else ">u2"
    count = width * height
    if len(data) - offset < count * np.dtype(dtype).itemsize:
        raise FormatError(f"{path}: raster is truncated")
    raster = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    return ObjectMask(bits=raster.reshape(height, width) > 0)


def write_pgm(path: PathLike, mask: ObjectMask) -> None:
    raster = np.where(mask.bits, 255, 0).astype(np.uint8)
    with open(path, "wb") as handle:
        handle.write(f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii"))
        handle.write(raster.tobytes())
