"""
Scene bundles: a synthetic scene, its ground truth, and the degraded inputs handed to the pipeline
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from scipy import ndimage

from formats.json_io import read_json, write_box_track, write_calibration, write_json
from formats.lray import write_lray
from formats.pfm import write_depth
from formats.pgm import write_pgm
from formats.ply import write_ply
from geometry.masks import roi_mask_from_box
from models.depth_models import DepthMap, ObjectMask
from models.geometry_models import BBox3D, BoxTrack, Camera, TrackFrame
from models.scene_models import BundleManifest, DegradationConfig, SceneBundle, SceneConfig
from oracle_sim.render import render_labels
from oracle_sim.scanner import scan_scene
from utils.errors import EmptyMask
from voxelgrid.rays import remove_points_in_box

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

BUNDLE_FILES: Dict[str, str] = {
    "calibration": "calibration.json",
    "boxes": "box_track.json",
    "scan_gt": "scan_gt.lray",
    "scan": "scan_removed.lray",
    "depth": "depth.pfm",
    "mask": "mask.pgm",
    "roi_mask": "roi_mask.pgm",
    "gt_points": "gt_points.ply",
    "manifest": "bundle.json",
}

ABLATIONS: Dict[str, DegradationConfig] = {
    "full": DegradationConfig(),
    "no-gradient-filter": DegradationConfig(),
    "box-mask": DegradationConfig(mask="roi"),
    "no-gradient-filter-box-mask": DegradationConfig(mask="roi"),
    "flat-depth": DegradationConfig(flat_depth=True),
    "flat-depth-box-mask": DegradationConfig(mask="roi", flat_depth=True),
}


def box_center_depth(cam: Camera, box: BBox3D) -> float:
    return float(cam.to_camera(box.center)[2])


def apply_flat_depth(depth: DepthMap, mask: ObjectMask, value: float) -> DepthMap:
    """Constant relative depth on every mask pixel"""
    values = np.array(depth.values, dtype=np.float64, copy=True)
    values[mask.bits] = value
    return depth.with_values(values)


def box_mask(cam: Camera, box: BBox3D, enlarge_pct: float = 0.10) -> ObjectMask:
    """Mask covering the projected box hull instead of the object silhouette"""
    return roi_mask_from_box(cam, box, enlarge_pct)


def _relative_depth(metric: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    relative = (metric - beta) / alpha
    finite = np.isfinite(relative)
    # pixels that see nothing get the farthest relative depth in view
    fill = relative[finite].max() if finite.any() else 0.0
    return np.where(finite, relative, fill)


def make_bundle(scene: SceneConfig, seed: Optional[int] = None) -> SceneBundle:
    """Render, scan and degrade one scene; identical inputs and seed give bit-identical bundles"""
    seed = scene.seed if seed is None else seed
    cam = scene.camera
    box = scene.object_box()
    primitives = scene.scenery + ([scene.object] if scene.object is not None else [])
    degradation = scene.degradation

    scan_gt = scan_scene(scene.scanner, primitives)
    metric, labels = render_labels(cam, primitives)
    if scene.object is not None:
        silhouette = ObjectMask(bits=labels == len(scene.scenery))
    else:
        silhouette = ObjectMask(bits=np.zeros(labels.shape, dtype=bool))
    if box is None:
        scan_removed, object_rays, gt_points, roi = scan_gt, np.zeros(0, dtype=np.int64), np.zeros((0, 3)), None
    else:
        if scene.object is not None and silhouette.area == 0:
            raise EmptyMask("the object is not visible from the camera")
        removed = remove_points_in_box(scan_gt, box, policy="no_return")
        scan_removed, object_rays, gt_points = removed.scan, removed.ray_indices, removed.points
        roi = box_mask(cam, box, degradation.roi_enlarge_pct)

    rng = np.random.default_rng(seed)
    relative = _relative_depth(metric, scene.alpha, scene.beta)
    if degradation.edge_blur > 0:
        relative = ndimage.gaussian_filter(relative, sigma=degradation.edge_blur, mode="nearest")
    if degradation.noise_sigma > 0:
        relative = relative + rng.normal(0.0, degradation.noise_sigma, size=relative.shape)
    if degradation.outlier_fraction > 0:
        background = np.flatnonzero(~silhouette.bits.ravel())
        count = int(round(degradation.outlier_fraction * background.size))
        picked = rng.choice(background, size=count, replace=False)
        flat = relative.ravel().copy()
        flat[picked] = rng.uniform(flat.min(), flat.max(), size=count)
        relative = flat.reshape(relative.shape)

    mask = roi if degradation.mask == "roi" and roi is not None else silhouette
    depth = DepthMap(values=relative, kind="relative")
    if degradation.flat_depth and box is not None:
        depth = apply_flat_depth(depth, mask, (box_center_depth(cam, box) - scene.beta) / scene.alpha)

    logger.debug("bundle: %d object rays, %d silhouette pixels, degradation %s",
                 object_rays.size, silhouette.area, degradation.model_dump())
    return SceneBundle(
        scene=scene.model_copy(update={"seed": seed}),
        box=box,
        scan_gt=scan_gt,
        scan_removed=scan_removed,
        depth=depth,
        metric_depth=DepthMap(values=metric, kind="metric"),
        mask=mask,
        silhouette=silhouette,
        roi_mask=roi,
        object_rays=object_rays,
        gt_points=gt_points.reshape(-1, 3),
    )


def ablation_scene(scene: SceneConfig, variant: str) -> SceneConfig:
    """Same scene with the variant's mask / depth degradation; noise settings are kept"""
    if variant not in ABLATIONS:
        raise ValueError(f"unknown ablation variant {variant!r}; choose from {sorted(ABLATIONS)}")
    target = ABLATIONS[variant]
    degradation = scene.degradation.model_copy(update={"mask": target.mask, "flat_depth": target.flat_depth})
    return scene.model_copy(update={"degradation": degradation})


def write_bundle(bundle: SceneBundle, out_dir: PathLike) -> Dict[str, str]:
    """Write every bundle file; returns role -> path"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {role: str(out / name) for role, name in BUNDLE_FILES.items()}
    write_calibration(paths["calibration"], bundle.camera)
    if bundle.box is None:
        paths.pop("boxes")
    else:
        write_box_track(paths["boxes"], BoxTrack(frames=[TrackFrame(frame=0, box=bundle.box)]))
    write_lray(paths["scan_gt"], bundle.scan_gt)
    write_lray(paths["scan"], bundle.scan_removed)
    write_depth(paths["depth"], bundle.depth)
    write_pgm(paths["mask"], bundle.mask)
    if bundle.roi_mask is None:
        paths.pop("roi_mask")
    else:
        write_pgm(paths["roi_mask"], bundle.roi_mask)
    write_ply(paths["gt_points"], bundle.gt_points, comment="removed object returns, world frame")
    manifest = BundleManifest(
        scene=bundle.scene, box=bundle.box, alpha=bundle.alpha, beta=bundle.beta, seed=bundle.scene.seed,
        object_rays=bundle.object_rays.tolist(), files={role: Path(p).name for role, p in paths.items()},
    )
    write_json(paths["manifest"], manifest.to_json())
    return paths


def read_manifest(bundle_dir: PathLike) -> BundleManifest:
    return BundleManifest.from_json(read_json(Path(bundle_dir) / BUNDLE_FILES["manifest"]))
