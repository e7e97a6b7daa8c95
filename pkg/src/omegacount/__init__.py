"""People detection and counting for image sequences.

Pipeline: adaptive mixture-of-Gaussians background subtraction produces a
foreground mask; connected components are traced to closed boundaries; four
head-neck-shoulder shape descriptors vote on each contour; a weighted
decision yields the per-frame human count.
"""

from ._kernel import BACKEND, available_backends
from .background import (
    BackgroundModel,
    GaussianComponent,
    MogConfig,
    PixelMixture,
    background_count,
    match_component,
    model_new,
    process_frame,
    update_pixel,
)
from .contour import (
    Component,
    ContourPath,
    convex_hull,
    count_local_minima,
    curvature_series,
    label_components,
    polygon_area,
    primary_contour,
    trace_boundary,
    upper_segment,
)
from .descriptors import (
    CalibrationGrid,
    DescriptorOutcome,
    OmegaConfig,
    calibrate,
    classify,
)
from .mask import ForegroundMask, frame_to_mask, mask_to_frame
from .pipeline import (
    DetectionReport,
    detect_in_mask,
    process_sequence,
    render_annotations,
    report_to_jsonl,
)
from .pnm import Frame, FrameSequence, decode_pnm, encode_pnm, load_sequence, to_grayscale
from .synth import (
    CorpusManifest,
    OmegaShapeParams,
    build_corpus,
    gen_distractor,
    gen_omega,
    gen_sequence,
)

__version__ = "0.1.0"
