"""Geometry, encoding, re-scoring, suppression, and evaluation for
quadrilateral detection boxes.

The core idea: instead of regressing four vertices in a brittle canonical
order, describe a box by the sorted multisets of its x and y coordinates
(key edges) plus the matching type pairing them back into corners. The
sorted representation is invariant to how the annotation happened to be
stored and moves no faster than the vertices themselves under noise.
"""

from .codec import (
    ALL_MATCHING_TYPES,
    DEFAULT_GRID_M,
    DegenerateQuadError,
    GridSpec,
    HalfEncoded,
    KeyEdges,
    MatchingType,
    decode,
    dequantize,
    encode,
    enumerate_valid_matchings,
    half_decode,
    half_encode,
    is_valid_matching,
    padded_envelope_grid,
    quantize,
)
from .evaluate import (
    DEFAULT_IOU_THRESH,
    EvalResult,
    GtInstance,
    ImageTally,
    match_image,
    sweep_thresholds,
)
from .geom import (
    Point,
    Polygon,
    Quad,
    area,
    envelope,
    intersection_area,
    iou,
    is_convex,
    is_simple,
    rotate,
    signed_area,
)
from .protocols import (
    InstabilityReport,
    JitterVertex,
    OrderedTarget,
    Rotate,
    adversarial_corpus,
    measure_instability,
    obd_target,
    order_clockwise_minx,
    order_dmpnet,
    order_qrn,
    order_textboxespp,
)
from .rescore import (
    DEFAULT_GAMMA,
    DEFAULT_PROMINENCE,
    PeakPattern,
    ScoredDetection,
    fuse,
    peak_mass,
    peak_pattern,
    s_obd,
)
from .suppression import (
    DEFAULT_NMS_THRESHOLD,
    DEFAULT_PNMS_THRESHOLD,
    Candidate,
    SuppressionConfig,
    SuppressionMode,
    filter_valid,
    suppress,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_MATCHING_TYPES",
    "DEFAULT_GAMMA",
    "DEFAULT_GRID_M",
    "DEFAULT_IOU_THRESH",
    "DEFAULT_NMS_THRESHOLD",
    "DEFAULT_PNMS_THRESHOLD",
    "DEFAULT_PROMINENCE",
    "Candidate",
    "DegenerateQuadError",
    "EvalResult",
    "GridSpec",
    "GtInstance",
    "HalfEncoded",
    "ImageTally",
    "InstabilityReport",
    "JitterVertex",
    "KeyEdges",
    "MatchingType",
    "OrderedTarget",
    "PeakPattern",
    "Point",
    "Polygon",
    "Quad",
    "Rotate",
    "ScoredDetection",
    "SuppressionConfig",
    "SuppressionMode",
    "adversarial_corpus",
    "area",
    "decode",
    "dequantize",
    "encode",
    "enumerate_valid_matchings",
    "envelope",
    "filter_valid",
    "fuse",
    "half_decode",
    "half_encode",
    "intersection_area",
    "iou",
    "is_convex",
    "is_simple",
    "is_valid_matching",
    "match_image",
    "measure_instability",
    "obd_target",
    "order_clockwise_minx",
    "order_dmpnet",
    "order_qrn",
    "order_textboxespp",
    "padded_envelope_grid",
    "peak_mass",
    "peak_pattern",
    "quantize",
    "rotate",
    "s_obd",
    "signed_area",
    "suppress",
    "sweep_thresholds",
    "__version__",
]
