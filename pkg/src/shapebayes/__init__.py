"""Bayesian shape classification with similarity transforms marginalized out.

2D: a closed-form marginal likelihood over translation, rotation, scale, and
noise level, a cyclic correspondence search, exemplar class models, and MAP
classification.  3D: a quaternion rotation-marginalization kernel with
Monte-Carlo and series evaluators.  Brute-force quadrature oracles validate
both closed forms at small instance sizes.
"""

from .benchmark import BenchmarkReport, BenchmarkSpec, run_benchmark, sweep_sample_count
from .classify import (
    ClassificationResult,
    ClassModel,
    class_log_likelihood,
    classify,
    load_models,
    save_models,
    train,
)
from .estimator import ShapeBayesClassifier
from .images import BinaryImage, DegenerateRegionError, NoForegroundError, extract_boundary, read_pgm
from .io import load_shape, save_shape
from .likelihood import (
    Correspondence,
    Regulators,
    RegulatorUnderflowError,
    SufficientStats,
    best_correspondence,
    default_regulators,
    log_marginal_kernel,
    sufficient_stats,
)
from .oracles import (
    GridRefinementError,
    QuadratureSpec,
    brute_marginal_2d,
    brute_translation_marginal_3d,
    expected_constant_offset_2d,
)
from .quat3d import (
    MarginalEstimate,
    Quaternion,
    RotationKernel,
    SeriesDivergenceError,
    build_rotation_kernel,
    fourier_determinant,
    quat_commutator,
    quat_multiply,
    rotate,
    rotation_marginal_mc,
    rotation_marginal_series,
    translation_marginal_exponent,
)
from .shapes import (
    Shape,
    ShapeError,
    SimilarityTransform2,
    apply_transform,
    as_shape,
    normalize_rms,
    resample_arclength,
)
from .synth import FAMILY_NAMES, make_template, synth_shape

__version__ = "0.1.0"

__all__ = [
    "BenchmarkReport",
    "BenchmarkSpec",
    "BinaryImage",
    "ClassificationResult",
    "ClassModel",
    "Correspondence",
    "DegenerateRegionError",
    "FAMILY_NAMES",
    "GridRefinementError",
    "MarginalEstimate",
    "NoForegroundError",
    "Quaternion",
    "QuadratureSpec",
    "Regulators",
    "RegulatorUnderflowError",
    "RotationKernel",
    "SeriesDivergenceError",
    "Shape",
    "ShapeBayesClassifier",
    "ShapeError",
    "SimilarityTransform2",
    "SufficientStats",
    "apply_transform",
    "as_shape",
    "best_correspondence",
    "brute_marginal_2d",
    "brute_translation_marginal_3d",
    "build_rotation_kernel",
    "class_log_likelihood",
    "classify",
    "default_regulators",
    "expected_constant_offset_2d",
    "extract_boundary",
    "fourier_determinant",
    "load_models",
    "load_shape",
    "log_marginal_kernel",
    "make_template",
    "normalize_rms",
    "quat_commutator",
    "quat_multiply",
    "read_pgm",
    "resample_arclength",
    "rotate",
    "rotation_marginal_mc",
    "rotation_marginal_series",
    "run_benchmark",
    "save_models",
    "save_shape",
    "sufficient_stats",
    "sweep_sample_count",
    "synth_shape",
    "train",
    "translation_marginal_exponent",
]
