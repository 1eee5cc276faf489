"""
Pydantic models for LiDAR scans, voxel grids and ray updates
"""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.arrays import BoolArray, FloatArray
from models.geometry_models import BoxFrame

NO_RETURN = float("inf")


class LidarScan(BaseModel):
    """Ray set; range == NO_RETURN (+inf) means no echo"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    origins: FloatArray = Field(description="(N, 3) ray origins in meters")
    directions: FloatArray = Field(description="(N, 3) unit ray directions")
    ranges: FloatArray = Field(description="(N,) ranges in meters or NO_RETURN")
    frame_id: str = Field(default="world")

    @model_validator(mode="after")
    def _check_rays(self) -> "LidarScan":
        n = self.ranges.shape[0] if self.ranges.ndim == 1 else -1
        if n < 0 or self.origins.shape != (n, 3) or self.directions.shape != (n, 3):
            raise ValueError("origins, directions must be (N, 3) and ranges (N,)")
        # f32 storage cannot hold unit norm to 1e-9
        tol = 1e-6 if self.directions.dtype == np.float32 else 1e-9
        norms = np.linalg.norm(self.directions.astype(np.float64), axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > tol)
        if bad.size:
            raise ValueError(f"ray {int(bad[0])} direction is not unit length")
        bad = np.flatnonzero(~((self.ranges > 0) | np.isposinf(self.ranges)))
        if bad.size:
            raise ValueError(f"ray {int(bad[0])} has a non-positive or NaN range")
        return self

    def __len__(self) -> int:
        return int(self.ranges.shape[0])

    @property
    def has_return(self) -> np.ndarray:
        return np.isfinite(self.ranges)

    def points(self) -> np.ndarray:
        """Return points (N, 3) in the scan frame; NaN rows for NO_RETURN"""
        ranges = np.where(self.has_return, self.ranges.astype(np.float64), np.nan)
        return self.origins.astype(np.float64) + ranges[:, None] * self.directions.astype(np.float64)

    def with_ranges(self, ranges: np.ndarray) -> "LidarScan":
        return LidarScan(origins=self.origins, directions=self.directions, ranges=ranges, frame_id=self.frame_id)

    def subset(self, keep: np.ndarray) -> "LidarScan":
        return LidarScan(
            origins=self.origins[keep], directions=self.directions[keep],
            ranges=self.ranges[keep], frame_id=self.frame_id,
        )


class VoxelGrid(BaseModel):
    """Box-aligned occupancy; occupancy[ix, iy, iz], flattened x-fastest"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frame: BoxFrame
    resolution: Tuple[int, int, int] = Field(description="(nx, ny, nz)")
    occupancy: BoolArray = Field(description="(nx, ny, nz) booleans")
    dropped_points: int = Field(default=0, ge=0, description="Points outside the box at voxelization")

    @field_validator("resolution")
    @classmethod
    def _check_resolution(cls, value: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if any(n < 1 for n in value):
            raise ValueError("resolution counts must be >= 1")
        return value

    @model_validator(mode="after")
    def _check_occupancy(self) -> "VoxelGrid":
        if self.occupancy.shape != tuple(self.resolution):
            raise ValueError(f"occupancy shape {self.occupancy.shape} != resolution {self.resolution}")
        return self

    @property
    def voxel_size(self) -> np.ndarray:
        return (self.frame.delta_max - self.frame.delta_min) / np.asarray(self.resolution, dtype=np.float64)

    @property
    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    def flat_occupancy(self) -> np.ndarray:
        return self.occupancy.ravel(order="F")

    def voxel_bounds(self, index: Tuple[int, int, int]) -> Tuple[np.ndarray, np.ndarray]:
        """Aligned-frame (lower, upper) corners of one voxel"""
        lower = self.frame.delta_min + np.asarray(index, dtype=np.float64) * self.voxel_size
        return lower, lower + self.voxel_size

    def occupied_centers(self) -> np.ndarray:
        """Camera-frame centers of occupied voxels"""
        idx = np.argwhere(self.occupancy).astype(np.float64)
        aligned = self.frame.delta_min + (idx + 0.5) * self.voxel_size
        return aligned @ self.frame.rotation

    def with_occupancy(self, occupancy: np.ndarray) -> "VoxelGrid":
        return VoxelGrid(frame=self.frame, resolution=self.resolution, occupancy=occupancy, dropped_points=self.dropped_points)


class RayUpdate(BaseModel):
    model_config = ConfigDict(frozen=True)

    ray_index: int = Field(ge=0)
    old_range: float = Field(description="Range before the update (inf = NO_RETURN)")
    new_range: float = Field(gt=0)
    hit_voxel: Tuple[int, int, int]
