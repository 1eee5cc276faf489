"""
Pydantic models for pipeline and evaluation outputs
"""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.depth_models import AffineDepthParams, PixelSampleSet
from models.geometry_models import BoxFrame


class FitReport(BaseModel):
    """Structured output of the fit pipeline"""
    ransac: AffineDepthParams = Field(description="Background RANSAC estimate")
    lp: Optional[AffineDepthParams] = Field(default=None, description="Box-constrained refinement (None when it fell back)")
    used: Literal["lp", "ransac"] = Field(default="lp", description="Which parameters drive lifting")
    gradient_threshold: Optional[float] = Field(default=None, description="Threshold applied by the gradient filter")
    mask_pixels: int = Field(default=0, description="Object pixels before filtering")
    kept_pixels: int = Field(default=0, description="Object pixels after filtering")
    contour_pixels: int = Field(default=0, description="Silhouette pixels restored after the gradient filter dropped them")
    off_box_pixels: int = Field(default=0, description="Kept pixels whose viewing ray misses the box")
    lp_recovery: Optional[Literal["dropped_samples", "ransac"]] = Field(default=None, description="How a failed LP was recovered (None when it solved directly)")
    lp_dropped_samples: int = Field(default=0, description="Samples outside the box at the RANSAC fit, left out after an infeasible LP")
    correspondences: int = Field(default=0, description="Background LiDAR/depth pairs")
    warnings: List[str] = Field(default=[])
    config: Dict[str, Any] = Field(default={}, description="Resolved knobs, echoed for provenance")


class InpaintReport(BaseModel):
    """Structured output of the inpaint pipeline"""
    fit: FitReport
    lifted_points: int = Field(default=0)
    dropped_points: int = Field(default=0, description="Lifted points outside the box")
    occupied_voxels: int = Field(default=0)
    updated_rays: int = Field(default=0)
    config: Dict[str, Any] = Field(default={})


class EvalReport(BaseModel):
    """Reconstruction errors against the removed ground-truth object"""
    absrel_object: Optional[float] = Field(default=None, ge=0, description="AbsRel over rays whose GT return is inside the box")
    absrel_all: Optional[float] = Field(default=None, ge=0, description="AbsRel over all matched rays")
    l2_object: Optional[float] = Field(default=None, ge=0, description="Mean point error (m) over object rays")
    l2_all: Optional[float] = Field(default=None, ge=0, description="Mean point error (m) over all matched rays")
    matched_rays: int = Field(default=0, ge=0)
    object_rays: int = Field(default=0, ge=0)
    missed_rays: int = Field(default=0, ge=0, description="Rays with a return in exactly one scan")
    missed_object_rays: int = Field(default=0, ge=0)
    miss_rate: float = Field(default=0.0, ge=0, le=1)
    absrel_denominator: Literal["reconstructed", "ground_truth"] = Field(default="reconstructed")
    variant: Optional[str] = Field(default=None, description="Ablation variant that produced the reconstruction")
    config: Dict[str, Any] = Field(default={})

    @model_validator(mode="after")
    def _check_finite(self) -> "EvalReport":
        if self.matched_rays >= 1:
            for name in ("absrel_all", "l2_all"):
                value = getattr(self, name)
                if value is None or value != value or value == float("inf"):
                    raise ValueError(f"{name} must be finite when rays matched")
        return self


class FitResult(BaseModel):
    """Fit pipeline output: the report plus what lifting needs"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    report: FitReport
    params: AffineDepthParams = Field(description="Parameters chosen for lifting")
    frame: BoxFrame
    samples: PixelSampleSet = Field(description="Filtered object pixels that view the box")
