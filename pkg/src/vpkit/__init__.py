"""vpkit: vanishing-point consistency toolkit.

Geometry, edge-alignment scoring with analytic gradients, classical VP
detection, outline/mask dataset tooling, diffusion guidance arithmetic,
angle-accuracy evaluation, and an annotation HTTP service.
"""

__version__ = "0.1.0"

from .geometry import (
    CameraIntrinsics,
    HomogeneousPoint,
    LineSegment,
    Point2,
    UnitVector2,
    backproject_direction,
    camera_angle_error,
    intersect_lines,
    segment_vp_deviation,
    undirected_angle,
    vp_direction_at,
)
from .edges import (
    EdgeField,
    VpLossConfig,
    VpScoreReport,
    edge_direction_at,
    finite_difference_gradient,
    gradient_check,
    sobel,
    to_grayscale,
    total_loss,
    vp_alignment_score,
    vp_loss,
    vp_loss_gradient,
)
from .detect import (
    DetectedSegment,
    RansacConfig,
    VpCandidate,
    detect_vps,
    detect_vps_in_image,
    extract_segments,
)
from .contours import (
    OutlineEdge,
    Polyline,
    douglas_peucker,
    extract_outlines,
    render_condition,
    sample_training_condition,
    select_vp_aligned_edges,
    trace_contours,
)
from .maskgen import Mask, OutlinePair, build_mask, dilate, pair_endpoints, rasterize_polygon
from .guidance import (
    DiffusionSchedule,
    GuidanceWeights,
    add_noise,
    cfg_dual,
    cfg_text,
    controlnet_mse,
    inpaint_step,
    predict_x0,
    run_inpainting,
    two_step_x0,
)
from .latentio import read_latent, write_latent
from .metrics import (
    AAReport,
    angle_accuracy,
    best_of_k_select,
    build_aa_report,
    image_angle_error,
    mse,
    psnr,
)
from .annotations import AnnotationRecord, parse_annotation

__all__ = [
    "__version__",
    # geometry
    "CameraIntrinsics", "HomogeneousPoint", "LineSegment", "Point2", "UnitVector2",
    "backproject_direction", "camera_angle_error", "intersect_lines",
    "segment_vp_deviation", "undirected_angle", "vp_direction_at",
    # edges
    "EdgeField", "VpLossConfig", "VpScoreReport", "edge_direction_at",
    "finite_difference_gradient", "gradient_check", "sobel", "to_grayscale",
    "total_loss", "vp_alignment_score", "vp_loss", "vp_loss_gradient",
    # detection
    "DetectedSegment", "RansacConfig", "VpCandidate", "detect_vps",
    "detect_vps_in_image", "extract_segments",
    # contours
    "OutlineEdge", "Polyline", "douglas_peucker", "extract_outlines",
    "render_condition", "sample_training_condition", "select_vp_aligned_edges",
    "trace_contours",
    # masks
    "Mask", "OutlinePair", "build_mask", "dilate", "pair_endpoints", "rasterize_polygon",
    # guidance
    "DiffusionSchedule", "GuidanceWeights", "add_noise", "cfg_dual", "cfg_text",
    "controlnet_mse", "inpaint_step", "predict_x0", "run_inpainting", "two_step_x0",
    # latent io
    "read_latent", "write_latent",
    # metrics
    "AAReport", "angle_accuracy", "best_of_k_select", "build_aa_report",
    "image_angle_error", "mse", "psnr",
    # annotations
    "AnnotationRecord", "parse_annotation",
]
