"""
Pydantic model for the pipeline knobs
"""

from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from utils.settings import get_settings


class PipelineConfig(BaseModel):
    """Every knob of fit / inpaint / evaluate with its documented default and range"""
    calibration: Optional[Path] = Field(default=None, description="Calibration JSON")
    scan: Optional[Path] = Field(default=None, description="Input .lray scan")
    depth: Optional[Path] = Field(default=None, description="Relative depth PFM")
    mask: Optional[Path] = Field(default=None, description="Object mask PGM")
    boxes: Optional[Path] = Field(default=None, description="Box-track JSON")
    crop: Optional[Path] = Field(default=None, description="Crop-window JSON placing the depth raster in the full frame")
    frame: Optional[int] = Field(default=None, description="Track frame to use (default: first)")

    gradient_threshold: Optional[float] = Field(default=None, gt=0, description="Relative-depth units per pixel; None = 0.05 x mask depth range")
    skip_gradient_filter: bool = Field(default=False)
    keep_contour: bool = Field(default=True, description="Restore occluding silhouette pixels the gradient filter dropped")
    ransac_tol: float = Field(default=0.05, gt=0, description="Inlier tolerance (meters)")
    ransac_iterations: int = Field(default=1000, ge=1, le=1_000_000)
    ransac_seed: int = Field(default_factory=lambda: get_settings().ransac_seed)
    voxel_resolution: Tuple[int, int, int] = Field(default=(64, 64, 64))
    dilation_radius: int = Field(default=0, ge=0, le=8, description="Occupancy dilation in voxels")
    enlarge_pct: float = Field(default=0.10, ge=0, le=1)
    invert_disparity: bool = Field(default=False)
    absrel_denominator: Literal["reconstructed", "ground_truth"] = Field(default="reconstructed")
    voxel_center_distance: bool = Field(default=False)
    lp_fallback: bool = Field(default=False, description="Infeasible: drop samples outside the box at the RANSAC fit and re-solve; unbounded: use the RANSAC fit")
    threads: int = Field(default_factory=lambda: get_settings().threads, ge=1, le=256)

    @field_validator("calibration", "scan", "depth", "mask", "boxes", "crop")
    @classmethod
    def _check_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.exists():
            raise ValueError(f"file not found: {value}")
        return value

    @field_validator("voxel_resolution")
    @classmethod
    def _check_resolution(cls, value: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if any(not 1 <= n <= 512 for n in value):
            raise ValueError("voxel resolution must be within 1..512 per axis")
        return value

    def knobs(self) -> Dict[str, Any]:
        """Everything except file paths, JSON-ready"""
        data = self.model_dump(mode="json", exclude={"calibration", "scan", "depth", "mask", "boxes", "crop"})
        data.pop("threads", None)
        return data
