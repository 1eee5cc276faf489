"""
Evaluation pipeline: score a reconstruction, or regenerate a bundle under an ablation and score that
"""

import logging
from typing import Optional

from metrics.reconstruction import evaluate
from models.config_models import PipelineConfig
from models.geometry_models import BBox3D
from models.report_models import EvalReport
from models.scan_models import LidarScan
from models.scene_models import BundleManifest, SceneBundle
from oracle_sim.bundle import ablation_scene, make_bundle
from pipelines.inpaint_pipeline import InpaintPipeline, InpaintResult
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def variant_config(config: PipelineConfig, variant: str) -> PipelineConfig:
    """Pipeline knobs a variant implies on top of the user's"""
    if variant == "full":
        return config
    # degraded inputs seldom leave one scale that fits every sample in the box
    update = {"lp_fallback": True}
    if variant.startswith("no-gradient-filter"):
        update["skip_gradient_filter"] = True
    return config.model_copy(update=update)


class EvaluationPipeline:
    """Scores reconstructions against the removed ground-truth object"""

    def __init__(self, config: PipelineConfig):
        self.config = config

    def score(self, gt_scan: LidarScan, rec_scan: LidarScan, box: BBox3D, variant: Optional[str] = None) -> EvalReport:
        return evaluate(
            gt_scan, rec_scan, box,
            denominator=self.config.absrel_denominator,
            variant=variant,
            config=self.config.knobs(),
        )

    def inpaint_bundle(self, bundle: SceneBundle, variant: str = "full") -> InpaintResult:
        if bundle.box is None:
            raise ConfigError("bundle has no object box to inpaint")
        pipeline = InpaintPipeline(variant_config(self.config, variant))
        return pipeline.run(bundle.camera, bundle.scan_removed, bundle.depth, bundle.mask, bundle.box)

    def run_ablation(self, manifest: BundleManifest, variant: str) -> EvalReport:
        """Regenerate the manifest's scene with the variant's degradation, inpaint it and score it"""
        if manifest.box is None:
            raise ConfigError("bundle has no object box to evaluate against")
        bundle = make_bundle(ablation_scene(manifest.scene, variant), manifest.seed)
        result = self.inpaint_bundle(bundle, variant)
        report = EvaluationPipeline(variant_config(self.config, variant)).score(bundle.scan_gt, result.scan, manifest.box, variant)
        logger.info("✅ %s: absrel_object=%s l2_object=%s", variant, report.absrel_object, report.l2_object)
        return report
