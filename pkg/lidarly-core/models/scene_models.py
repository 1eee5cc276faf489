"""
Pydantic models for synthetic scenes: primitives, the simulated scanner and the generated bundle
"""

import math
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from geometry.rotations import yaw_pitch_from_matrix, yaw_pitch_matrix
from models.arrays import Float64Array, IntArray
from models.depth_models import DepthMap, ObjectMask
from models.geometry_models import BBox3D, Camera, RigidTransform
from models.scan_models import LidarScan

BOX_PAD = 1e-6


class Primitive(BaseModel):
    """Analytic shape; pose maps its local frame into the world"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["sphere", "cuboid", "superellipsoid"]
    pose: RigidTransform = Field(default_factory=RigidTransform)
    extents: Float64Array = Field(description="Semi-axes / half sizes (meters); a sphere uses three equal radii")
    exponents: Tuple[float, float] = Field(default=(1.0, 1.0), description="Superellipsoid (e1, e2) shape exponents")

    @field_validator("extents")
    @classmethod
    def _check_extents(cls, value: np.ndarray) -> np.ndarray:
        if value.shape != (3,) or not np.all(value > 0) or not np.all(np.isfinite(value)):
            raise ValueError("extents must be three positive lengths")
        return value

    @field_validator("exponents")
    @classmethod
    def _check_exponents(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not all(0.0 < e <= 4.0 for e in value):
            raise ValueError("superellipsoid exponents must be in (0, 4]")
        return value

    @model_validator(mode="after")
    def _check_sphere(self) -> "Primitive":
        if self.kind == "sphere" and not np.allclose(self.extents, self.extents[0], rtol=0.0, atol=1e-12):
            raise ValueError("a sphere needs three equal radii")
        return self

    @classmethod
    def sphere(cls, center: Any, radius: float) -> "Primitive":
        return cls(kind="sphere", pose=RigidTransform(translation=center), extents=[radius] * 3)

    @classmethod
    def cuboid(cls, center: Any, size: Any, yaw: float = 0.0, pitch: float = 0.0) -> "Primitive":
        pose = RigidTransform(rotation=yaw_pitch_matrix(yaw, pitch), translation=center)
        return cls(kind="cuboid", pose=pose, extents=np.asarray(size, dtype=np.float64) / 2.0)

    def bounding_box(self) -> BBox3D:
        """Tight oriented box; the pose must be a pure yaw-pitch rotation"""
        yaw = pitch = 0.0
        if self.kind != "sphere":
            yaw, pitch = yaw_pitch_from_matrix(self.pose.rotation)
        return BBox3D(center=self.pose.translation, size=2.0 * self.extents, yaw=yaw, pitch=pitch)

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Primitive":
        if "pose" not in data and "center" in data:
            data = {**data, "pose": {"rotation": yaw_pitch_matrix(data.get("yaw", 0.0), data.get("pitch", 0.0)).reshape(-1).tolist(),
                                     "translation": data["center"]}}
        pose = data.get("pose") or {}
        return cls(
            kind=data["kind"],
            pose=RigidTransform(
                rotation=pose.get("rotation", np.eye(3).reshape(-1).tolist()),
                translation=pose.get("translation", [0.0, 0.0, 0.0]),
            ),
            extents=data["extents"],
            exponents=tuple(data.get("exponents", (1.0, 1.0))),
        )

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind, "pose": self.pose.to_json(), "extents": self.extents.tolist(), "exponents": list(self.exponents)}


class ScannerSpec(BaseModel):
    """Spinning LiDAR. Azimuth turns about world z from +x toward +y, elevation is above the xy plane"""
    model_config = ConfigDict(frozen=True)

    azimuth_count: int = Field(ge=1)
    elevation_count: int = Field(ge=1)
    azimuth_range: Tuple[float, float] = Field(default=(-math.pi, math.pi), description="Radians")
    elevation_range: Tuple[float, float] = Field(default=(-0.4, 0.1), description="Radians")
    max_range: float = Field(default=120.0, gt=0, description="Meters")
    origin: RigidTransform = Field(default_factory=RigidTransform, description="Sensor -> world transform")

    @field_validator("azimuth_range", "elevation_range")
    @classmethod
    def _check_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not value[0] < value[1]:
            raise ValueError("angle range must be increasing")
        return value

    @field_validator("elevation_range")
    @classmethod
    def _check_elevation(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] < -math.pi / 2 or value[1] > math.pi / 2:
            raise ValueError("elevation must stay within [-pi/2, pi/2]")
        return value

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "ScannerSpec":
        origin = data.get("origin") or {}
        return cls(
            **{k: v for k, v in data.items() if k != "origin"},
            origin=RigidTransform(
                rotation=origin.get("rotation", np.eye(3).reshape(-1).tolist()),
                translation=origin.get("translation", [0.0, 0.0, 0.0]),
            ),
        )

    def to_json(self) -> Dict[str, Any]:
        return {**self.model_dump(exclude={"origin"}), "origin": self.origin.to_json()}


class DegradationConfig(BaseModel):
    """How the bundle's depth map and mask deviate from the exact rendering"""
    model_config = ConfigDict(frozen=True)

    mask: Literal["silhouette", "roi"] = Field(default="silhouette", description="roi = projected-box hull instead of the true silhouette")
    roi_enlarge_pct: float = Field(default=0.10, ge=0, le=1)
    flat_depth: bool = Field(default=False, description="Object pixels get the box-center depth")
    edge_blur: float = Field(default=0.0, ge=0, le=20, description="Gaussian blur sigma (pixels) on relative depth, as monocular estimators smear silhouettes")
    noise_sigma: float = Field(default=0.0, ge=0, description="Gaussian noise on relative depth")
    outlier_fraction: float = Field(default=0.0, ge=0, le=1, description="Share of background pixels replaced by uniform values")


class SceneConfig(BaseModel):
    """Everything needed to generate a bundle (documented in scenes/example_scene.json)"""
    model_config = ConfigDict(frozen=True)

    camera: Camera
    scanner: ScannerSpec
    background: List[Primitive] = Field(default=[])
    occluders: List[Primitive] = Field(default=[], description="Extra background shapes, typically between sensor and object")
    object: Optional[Primitive] = Field(default=None, description="Inserted object; None for an object-free scene")
    box: Optional[BBox3D] = Field(default=None, description="Defaults to the object's tight box")
    alpha: float = Field(default=2.0, gt=0)
    beta: float = Field(default=3.0)
    degradation: DegradationConfig = Field(default_factory=DegradationConfig)
    seed: int = Field(default=0)

    @property
    def scenery(self) -> List[Primitive]:
        return list(self.background) + list(self.occluders)

    def object_box(self) -> Optional[BBox3D]:
        """The configured box, else the object's tight box padded by BOX_PAD so surface returns test inside"""
        if self.box is not None or self.object is None:
            return self.box
        tight = self.object.bounding_box()
        return BBox3D(center=tight.center, size=tight.size + 2.0 * BOX_PAD, yaw=tight.yaw, pitch=tight.pitch)

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "SceneConfig":
        return cls(
            camera=Camera.from_json(data["camera"]),
            scanner=ScannerSpec.from_json(data["scanner"]),
            background=[Primitive.from_json(p) for p in data.get("background", [])],
            occluders=[Primitive.from_json(p) for p in data.get("occluders", [])],
            object=Primitive.from_json(data["object"]) if data.get("object") else None,
            box=BBox3D.from_json(data["box"]) if data.get("box") else None,
            alpha=data.get("alpha", 2.0),
            beta=data.get("beta", 3.0),
            degradation=DegradationConfig(**data.get("degradation", {})),
            seed=data.get("seed", 0),
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "camera": self.camera.to_json(),
            "scanner": self.scanner.to_json(),
            "background": [p.to_json() for p in self.background],
            "occluders": [p.to_json() for p in self.occluders],
            "object": self.object.to_json() if self.object is not None else None,
            "box": self.box.to_json() if self.box is not None else None,
            "alpha": self.alpha,
            "beta": self.beta,
            "degradation": self.degradation.model_dump(),
            "seed": self.seed,
        }


class SceneBundle(BaseModel):
    """A generated scene with its ground truth"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scene: SceneConfig
    box: Optional[BBox3D] = Field(description="Object box; None for an object-free scene")
    scan_gt: LidarScan = Field(description="Scan with the object present")
    scan_removed: LidarScan = Field(description="Scan with object returns set to NO_RETURN")
    depth: DepthMap = Field(description="Relative depth after degradation")
    metric_depth: DepthMap = Field(description="Rendered camera-frame depth, +inf where nothing is hit")
    mask: ObjectMask = Field(description="Mask handed to the pipeline (silhouette or RoI)")
    silhouette: ObjectMask = Field(description="Exact object silhouette")
    roi_mask: Optional[ObjectMask] = Field(default=None)
    object_rays: IntArray = Field(description="Indices of rays whose ground-truth return is on the object")
    gt_points: Float64Array = Field(description="(K, 3) removed object returns, world frame")

    @property
    def alpha(self) -> float:
        return self.scene.alpha

    @property
    def beta(self) -> float:
        return self.scene.beta

    @property
    def camera(self) -> Camera:
        return self.scene.camera


class BundleManifest(BaseModel):
    """bundle.json: what was generated and where"""
    scene: SceneConfig
    box: Optional[BBox3D] = None
    alpha: float
    beta: float
    seed: int
    object_rays: List[int] = Field(default=[], description="Rays whose ground-truth return is on the object")
    files: Dict[str, str] = Field(default={}, description="Role -> file name inside the bundle directory")

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "BundleManifest":
        return cls(
            scene=SceneConfig.from_json(data["scene"]),
            box=BBox3D.from_json(data["box"]) if data.get("box") else None,
            alpha=data["alpha"], beta=data["beta"], seed=data["seed"],
            object_rays=data.get("object_rays", []),
            files=data.get("files", {}),
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "scene": self.scene.to_json(), "box": self.box.to_json() if self.box is not None else None,
            "alpha": self.alpha, "beta": self.beta, "seed": self.seed,
            "object_rays": self.object_rays, "files": self.files,
        }
