"""layertext: training-free layered scene-text editing.

Extract text-foreground layers, restore the background underneath,
apply user-specified geometric transforms, and recomposite with
depth-aware brightness/contrast modulation; plus histogram and string
metrics for judging composition quality.
"""

from .core import BBox, BinaryMask, DepthMap, RasterImage, TextRegion, from_float, to_float
from .fileio import (
    load_depth,
    load_image,
    load_layer,
    load_mask,
    save_depth,
    save_image,
    save_mask,
)
from .foreground import (
    DetectionSet,
    ForegroundLayer,
    extract_foreground,
    generate_mask,
    kmeans_refine,
)
from .inpaint import InpaintConfig, inpaint_baseline, inpaint_external
from .transform import (
    QuadWarp,
    Transform2D,
    apply_transform,
    compose,
    identity,
    make_quad_warp,
    make_rotation,
    make_scaling,
    make_translation,
)
from .depth import (
    DepthDelta,
    DepthParams,
    adjust_intensity,
    depth_aware_adjust,
    depth_delta,
    estimate_depth_external,
    foreground_depth,
)
from .composite import (
    CompositionJob,
    adjust_gamma,
    adjust_linear,
    compose_hard,
    histogram_match,
    mask_annulus,
)
from .metrics import (
    ChannelHistogram,
    MetricReport,
    bhattacharyya_distance,
    chi_square_distance,
    compare_histograms,
    histogram_correlation,
    histogram_intersection,
    intensity_histogram,
    ned,
    sentence_accuracy,
)
from .pipeline import EditScript, StageArtifacts, evaluate, run_pipeline, tamper_region

__version__ = "0.1.0"

__all__ = [
    "BBox", "BinaryMask", "DepthMap", "RasterImage", "TextRegion",
    "from_float", "to_float",
    "load_depth", "load_image", "load_layer", "load_mask",
    "save_depth", "save_image", "save_mask",
    "DetectionSet", "ForegroundLayer",
    "extract_foreground", "generate_mask", "kmeans_refine",
    "InpaintConfig", "inpaint_baseline", "inpaint_external",
    "QuadWarp", "Transform2D", "apply_transform", "compose", "identity",
    "make_quad_warp", "make_rotation", "make_scaling", "make_translation",
    "DepthDelta", "DepthParams", "adjust_intensity", "depth_aware_adjust",
    "depth_delta", "estimate_depth_external", "foreground_depth",
    "CompositionJob", "adjust_gamma", "adjust_linear", "compose_hard",
    "histogram_match", "mask_annulus",
    "ChannelHistogram", "MetricReport", "bhattacharyya_distance",
    "chi_square_distance", "compare_histograms", "histogram_correlation",
    "histogram_intersection", "intensity_histogram", "ned", "sentence_accuracy",
    "EditScript", "StageArtifacts", "evaluate", "run_pipeline", "tamper_region",
]
