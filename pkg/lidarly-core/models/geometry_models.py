"""
Pydantic models for cameras, rigid transforms and 3D boxes
"""

import math
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from geometry.rotations import is_rotation, normalize_angle, yaw_pitch_matrix
from models.arrays import Float64Array

ORTHO_TOL = 1e-9


class RigidTransform(BaseModel):
    """x -> rotation @ x + translation"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, validate_default=True)

    rotation: Float64Array = Field(default_factory=lambda: np.eye(3), description="3x3 orthonormal matrix")
    translation: Float64Array = Field(default_factory=lambda: np.zeros(3), description="Translation in meters")

    @field_validator("rotation")
    @classmethod
    def _check_rotation(cls, value: np.ndarray) -> np.ndarray:
        if value.size == 9:
            value = value.reshape(3, 3)
            value.setflags(write=False)
        if not is_rotation(value, ORTHO_TOL):
            raise ValueError("rotation must be orthonormal with determinant +1")
        return value

    @field_validator("translation")
    @classmethod
    def _check_translation(cls, value: np.ndarray) -> np.ndarray:
        if value.shape != (3,) or not np.all(np.isfinite(value)):
            raise ValueError("translation must be a finite 3-vector")
        return value

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def rotate(self, vectors: np.ndarray) -> np.ndarray:
        return np.asarray(vectors, dtype=np.float64) @ self.rotation.T

    def inverse(self) -> "RigidTransform":
        r_t = self.rotation.T
        return RigidTransform(rotation=r_t, translation=-(r_t @ self.translation))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other"""
        return RigidTransform(
            rotation=self.rotation @ other.rotation,
            translation=self.rotation @ other.translation + self.translation,
        )

    def to_json(self) -> Dict[str, List[float]]:
        return {"rotation": self.rotation.reshape(-1).tolist(), "translation": self.translation.tolist()}


class Camera(BaseModel):
    """Pinhole camera; pose maps world coordinates into the camera frame (x right, y down, z forward)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    fx: float = Field(gt=0, description="Focal length x (pixels)")
    fy: float = Field(gt=0, description="Focal length y (pixels)")
    cx: float = Field(description="Principal point x (pixels)")
    cy: float = Field(description="Principal point y (pixels)")
    width: int = Field(gt=0, description="Image width (pixels)")
    height: int = Field(gt=0, description="Image height (pixels)")
    pose: RigidTransform = Field(default_factory=RigidTransform, description="World -> camera transform")

    @model_validator(mode="after")
    def _check_principal_point(self) -> "Camera":
        if not 0 <= self.cx < self.width:
            raise ValueError(f"cx={self.cx} outside [0, {self.width})")
        if not 0 <= self.cy < self.height:
            raise ValueError(f"cy={self.cy} outside [0, {self.height})")
        return self

    @property
    def center_world(self) -> np.ndarray:
        return self.pose.inverse().translation

    def to_camera(self, points_world: np.ndarray) -> np.ndarray:
        return self.pose.apply(points_world)

    def unproject(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """K^-1 [u, v, 1] for continuous pixel coordinates; rows have z = 1"""
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        return np.stack([(u - self.cx) / self.fx, (v - self.cy) / self.fy, np.ones_like(u)], axis=-1)

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Camera":
        pose = data.get("pose") or {}
        return cls(
            fx=data["fx"], fy=data["fy"], cx=data["cx"], cy=data["cy"],
            width=data["width"], height=data["height"],
            pose=RigidTransform(
                rotation=pose.get("rotation", np.eye(3).reshape(-1).tolist()),
                translation=pose.get("translation", [0.0, 0.0, 0.0]),
            ),
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height,
            "pose": self.pose.to_json(),
        }


# Corner i has bit 0 -> +l/2, bit 1 -> +w/2, bit 2 -> +h/2 (clear bit -> negative half)
CORNER_SIGNS = np.array([[1.0 if i & (1 << k) else -1.0 for k in range(3)] for i in range(8)])


class BBox3D(BaseModel):
    """Oriented 3D box. Local axes are the columns of rot_z(yaw) @ rot_y(pitch) in the box's frame"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    center: Float64Array = Field(description="Box center (x, y, z) in meters")
    size: Float64Array = Field(description="(l, w, h) in meters")
    yaw: float = Field(default=0.0, description="Yaw in radians, normalized to (-pi, pi]")
    pitch: float = Field(default=0.0, description="Pitch in radians, normalized to (-pi, pi]")

    @field_validator("center")
    @classmethod
    def _check_center(cls, value: np.ndarray) -> np.ndarray:
        if value.shape != (3,) or not np.all(np.isfinite(value)):
            raise ValueError("center must be a finite 3-vector")
        return value

    @field_validator("size")
    @classmethod
    def _check_size(cls, value: np.ndarray) -> np.ndarray:
        if value.shape != (3,) or not np.all(value > 0):
            raise ValueError("size must be three positive lengths")
        return value

    @field_validator("yaw", "pitch")
    @classmethod
    def _wrap(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("angle must be finite")
        return normalize_angle(value)

    @property
    def half_extent(self) -> np.ndarray:
        return self.size / 2.0

    @property
    def orientation(self) -> np.ndarray:
        return yaw_pitch_matrix(self.yaw, self.pitch)

    def corners(self) -> np.ndarray:
        """8x3 corners in the documented bit order"""
        return self.center + (CORNER_SIGNS * self.half_extent) @ self.orientation.T

    def to_local(self, points: np.ndarray) -> np.ndarray:
        """Box-aligned coordinates relative to the center"""
        return (np.asarray(points, dtype=np.float64) - self.center) @ self.orientation

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "BBox3D":
        return cls(center=data["center"], size=data["size"], yaw=data.get("yaw", 0.0), pitch=data.get("pitch", 0.0))

    def to_json(self) -> Dict[str, Any]:
        return {"center": self.center.tolist(), "size": self.size.tolist(), "yaw": self.yaw, "pitch": self.pitch}


class TrackFrame(BaseModel):
    model_config = ConfigDict(frozen=True)

    frame: int = Field(description="Frame index")
    box: BBox3D


class BoxTrack(BaseModel):
    """Per-frame box sequence with a constant size"""
    model_config = ConfigDict(frozen=True)

    frames: List[TrackFrame] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_track(self) -> "BoxTrack":
        indices = [f.frame for f in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("frame indices must be strictly increasing")
        size = self.frames[0].box.size
        for f in self.frames[1:]:
            if not np.allclose(f.box.size, size, rtol=0.0, atol=1e-9):
                raise ValueError(f"box size changes at frame {f.frame}")
        return self

    def box_at(self, frame: int) -> BBox3D:
        for f in self.frames:
            if f.frame == frame:
                return f.box
        raise KeyError(f"frame {frame} not in track")

    def frame_nearest_yaw(self, yaw: float) -> int:
        """Frame whose box yaw is closest to the given yaw (wrapped); earliest frame wins ties"""
        def distance(f: TrackFrame) -> float:
            return abs(normalize_angle(f.box.yaw - yaw))
        return min(self.frames, key=distance).frame

    @classmethod
    def from_json(cls, data: List[Dict[str, Any]]) -> "BoxTrack":
        return cls(frames=[TrackFrame(frame=item["frame"], box=BBox3D.from_json(item)) for item in data])

    def to_json(self) -> List[Dict[str, Any]]:
        return [{"frame": f.frame, **f.box.to_json()} for f in self.frames]


class BoxFrame(BaseModel):
    """Camera-frame box alignment: a camera point p is inside the box iff delta_min <= R p <= delta_max"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rotation: Float64Array = Field(description="Camera -> box-aligned rotation R")
    delta_min: Float64Array = Field(description="R b - b0")
    delta_max: Float64Array = Field(description="R b + b0")
    half_extent: Float64Array = Field(description="b0 = (l/2, w/2, h/2)")
    camera_pose: RigidTransform = Field(default_factory=RigidTransform, description="World -> camera transform")

    @field_validator("rotation")
    @classmethod
    def _check_rotation(cls, value: np.ndarray) -> np.ndarray:
        if not is_rotation(value, ORTHO_TOL):
            raise ValueError("rotation must be orthonormal with determinant +1")
        return value

    @model_validator(mode="after")
    def _check_extent(self) -> "BoxFrame":
        if not np.allclose(self.delta_max - self.delta_min, 2.0 * self.half_extent, rtol=0.0, atol=1e-9):
            raise ValueError("delta_max - delta_min must equal 2 * half_extent")
        return self

    def align(self, points_cam: np.ndarray) -> np.ndarray:
        return np.asarray(points_cam, dtype=np.float64) @ self.rotation.T

    def align_world(self, points_world: np.ndarray) -> np.ndarray:
        return self.align(self.camera_pose.apply(points_world))

    def contains_aligned(self, aligned: np.ndarray, tol: float = 0.0) -> np.ndarray:
        aligned = np.asarray(aligned, dtype=np.float64)
        return np.all((aligned >= self.delta_min - tol) & (aligned <= self.delta_max + tol), axis=-1)


class CropWindow(BaseModel):
    """Square crop of the full frame resized to target x target pixels"""
    model_config = ConfigDict(frozen=True)

    x0: int = Field(description="Crop left edge (full-frame pixels)")
    y0: int = Field(description="Crop top edge (full-frame pixels)")
    side: int = Field(gt=0, description="Crop side (full-frame pixels)")
    target: int = Field(gt=0, description="Resized side (pixels)")
    encloses_mask: bool = Field(default=True, description="False when the image was too small to enclose the mask")

    @property
    def scale(self) -> float:
        return self.target / self.side

    def to_target(self, u: Any, v: Any) -> Tuple[np.ndarray, np.ndarray]:
        return (np.asarray(u, dtype=np.float64) - self.x0) * self.scale, (np.asarray(v, dtype=np.float64) - self.y0) * self.scale

    def to_full_frame(self, u: Any, v: Any) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(u, dtype=np.float64) / self.scale + self.x0, np.asarray(v, dtype=np.float64) / self.scale + self.y0

    def to_json(self) -> Dict[str, Any]:
        return {**self.model_dump(), "scale": self.scale}

