"""
JSON and CSV side files: calibration, box tracks, crops, ray updates
"""

import csv
import json
from pathlib import Path
from typing import Any, Sequence, Union

from pydantic import ValidationError

from models.geometry_models import BoxTrack, Camera, CropWindow
from models.scan_models import RayUpdate
from utils.errors import FormatError

PathLike = Union[str, Path]


def read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def write_json(path: PathLike, data: Any) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write("\n")


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def _parse(path: PathLike, parser, data: Any):
    try:
        return parser(data)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: missing or malformed field {exc}") from exc


def read_calibration(path: PathLike) -> Camera:
    """{"fx", "fy", "cx", "cy", "width", "height", "pose": {"rotation": [9], "translation": [3]}}"""
    return _parse(path, Camera.from_json, read_json(path))


def write_calibration(path: PathLike, cam: Camera) -> None:
    write_json(path, cam.to_json())


def read_box_track(path: PathLike) -> BoxTrack:
    """A list of {"frame", "center", "size", "yaw", "pitch"} or {"frames": [...]}"""
    data = read_json(path)
    if isinstance(data, dict):
        data = data.get("frames", [])
    return _parse(path, BoxTrack.from_json, data)


def write_box_track(path: PathLike, track: BoxTrack) -> None:
    write_json(path, track.to_json())


def read_crop(path: PathLike) -> CropWindow:
    data = read_json(path)
    try:
        return CropWindow(**{k: data[k] for k in ("x0", "y0", "side", "target", "encloses_mask") if k in data})
    except ValidationError as exc:
        raise FormatError(f"{path}: invalid crop window") from exc


def write_ray_updates_csv(path: PathLike, updates: Sequence[RayUpdate]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["ray_index", "old_range", "new_range", "ix", "iy", "iz"])
        for u in updates:
            writer.writerow([u.ray_index, repr(u.old_range), repr(u.new_range), *u.hit_voxel])
