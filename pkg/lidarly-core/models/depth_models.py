"""
Pydantic models for depth rasters, masks and the affine depth alignment
"""

from typing import Iterator, List, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.arrays import BoolArray, Float64Array, FloatArray


class DepthMap(BaseModel):
    """Row-major depth raster. Relative maps grow with distance; metric maps may hold +inf for no hit"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: FloatArray = Field(description="(height, width) depth values")
    origin_offset: Tuple[float, float] = Field(default=(0.0, 0.0), description="Full-frame pixel of the raster's top-left corner")
    scale: float = Field(default=1.0, gt=0, description="Raster pixels per full-frame pixel")
    kind: Literal["relative", "metric"] = Field(default="relative")

    @model_validator(mode="after")
    def _check_values(self) -> "DepthMap":
        if self.values.ndim != 2 or self.values.size == 0:
            raise ValueError("depth values must be a non-empty 2D grid")
        if self.kind == "relative" and not np.all(np.isfinite(self.values)):
            raise ValueError("relative depth values must be finite")
        if self.kind == "metric" and np.any(np.isnan(self.values)):
            raise ValueError("metric depth values must not be NaN")
        return self

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    def to_full_frame(self, u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Continuous raster coordinates -> continuous full-frame coordinates"""
        ox, oy = self.origin_offset
        return np.asarray(u, dtype=np.float64) / self.scale + ox, np.asarray(v, dtype=np.float64) / self.scale + oy

    def to_raster(self, u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Continuous full-frame coordinates -> continuous raster coordinates"""
        ox, oy = self.origin_offset
        return (np.asarray(u, dtype=np.float64) - ox) * self.scale, (np.asarray(v, dtype=np.float64) - oy) * self.scale

    def with_values(self, values: np.ndarray) -> "DepthMap":
        return DepthMap(values=values, origin_offset=self.origin_offset, scale=self.scale, kind=self.kind)


class ObjectMask(BaseModel):
    """Binary raster, True = object"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bits: BoolArray = Field(description="(height, width) booleans")

    @field_validator("bits")
    @classmethod
    def _check_bits(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 2 or value.size == 0:
            raise ValueError("mask must be a non-empty 2D grid")
        return value

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.bits))

    def bounding_box(self) -> Tuple[int, int, int, int]:
        """(x_min, y_min, x_max, y_max), inclusive"""
        rows = np.flatnonzero(self.bits.any(axis=1))
        cols = np.flatnonzero(self.bits.any(axis=0))
        return int(cols[0]), int(rows[0]), int(cols[-1]), int(rows[-1])


class PixelSample(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: float = Field(description="Full-frame pixel x (continuous)")
    v: float = Field(description="Full-frame pixel y (continuous)")
    d: float = Field(description="Relative depth")
    X: Float64Array = Field(description="R K^-1 [u, v, 1], box-aligned direction")

    @field_validator("X")
    @classmethod
    def _check_direction(cls, value: np.ndarray) -> np.ndarray:
        if value.shape != (3,) or not np.all(np.isfinite(value)):
            raise ValueError("X must be a finite 3-vector")
        return value


class PixelSampleSet(BaseModel):
    """Column storage for many PixelSamples"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: Float64Array
    v: Float64Array
    d: Float64Array
    X: Float64Array = Field(description="(N, 3) box-aligned directions")

    @model_validator(mode="after")
    def _check_columns(self) -> "PixelSampleSet":
        n = self.u.shape[0]
        if self.u.shape != (n,) or self.v.shape != (n,) or self.d.shape != (n,):
            raise ValueError("u, v and d must be 1D and equally long")
        if self.X.shape != (n, 3):
            raise ValueError("X must have shape (N, 3)")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X must be finite")
        return self

    def __len__(self) -> int:
        return int(self.u.shape[0])

    def __iter__(self) -> Iterator[PixelSample]:  # type: ignore[override]
        for i in range(len(self)):
            yield PixelSample(u=self.u[i], v=self.v[i], d=self.d[i], X=self.X[i])

    @classmethod
    def from_samples(cls, samples: Sequence[PixelSample]) -> "PixelSampleSet":
        return cls(
            u=[s.u for s in samples],
            v=[s.v for s in samples],
            d=[s.d for s in samples],
            X=np.array([s.X for s in samples], dtype=np.float64).reshape(-1, 3),
        )


SampleInput = Union[PixelSampleSet, Sequence[PixelSample]]


def as_sample_set(samples: SampleInput) -> PixelSampleSet:
    if isinstance(samples, PixelSampleSet):
        return samples
    return PixelSampleSet.from_samples(list(samples))


class AffineDepthParams(BaseModel):
    """metric = alpha * relative + beta"""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0, description="Scale (meters per relative-depth unit)")
    beta: float = Field(description="Shift (meters)")
    inlier_count: int = Field(default=0, ge=0)
    residual_rms: float = Field(default=0.0, ge=0, description="RMS residual over inliers (meters)")


class Correspondence(BaseModel):
    model_config = ConfigDict(frozen=True)

    d: float = Field(description="Relative depth at the background pixel")
    z: float = Field(gt=0, description="Camera-frame depth of the LiDAR point (meters)")


class CorrespondenceSet(BaseModel):
    """Column storage for many Correspondences"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    d: Float64Array
    z: Float64Array

    @model_validator(mode="after")
    def _check_columns(self) -> "CorrespondenceSet":
        if self.d.ndim != 1 or self.d.shape != self.z.shape:
            raise ValueError("d and z must be 1D and equally long")
        if np.any(self.z <= 0):
            raise ValueError("z must be positive")
        return self

    def __len__(self) -> int:
        return int(self.d.shape[0])

    def __iter__(self) -> Iterator[Correspondence]:  # type: ignore[override]
        for d, z in zip(self.d, self.z):
            yield Correspondence(d=d, z=z)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Correspondence]) -> "CorrespondenceSet":
        return cls(d=[p.d for p in pairs], z=[p.z for p in pairs])


PairInput = Union[CorrespondenceSet, Sequence[Correspondence], List[Correspondence]]


def as_correspondence_set(pairs: PairInput) -> CorrespondenceSet:
    if isinstance(pairs, CorrespondenceSet):
        return pairs
    return CorrespondenceSet.from_pairs(list(pairs))
