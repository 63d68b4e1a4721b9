"""Bidirectional shape-context correspondences with cluster pruning and TPS warping."""
from ._backend import NAME as BACKEND
from .baseline import Assignment, BenchRecord, bench_scaling, generate_shape, hungarian, make_gallery
from .clustering import OtsuResult, otsu_threshold
from .correspondence import (
    CorrespondencePair,
    CorrespondenceSet,
    Direction,
    PrunedCorrespondenceSet,
    backward_correspondences,
    bidirectional_cost,
    forward_correspondences,
    prune,
    select_direction,
)
from .descriptor import (
    CostMatrix,
    DescriptorSet,
    ShapeContextParams,
    chi2_cost,
    compute_descriptors,
    cost_matrix,
)
from .errors import *  # noqa: F401,F403
from .pipeline import MatchResult, PipelineConfig, classify_knn, match_shapes
from .shapes import (
    BinaryImage,
    Contour,
    Point2,
    Shape,
    extract_contours,
    load_fixture,
    load_pgm,
    load_points,
    normalize,
    save_points,
)
from .tps import TpsConstraints, TpsModel, bending_energy, fit_tps, warp_point, warp_shape

__version__ = "0.1.0"
