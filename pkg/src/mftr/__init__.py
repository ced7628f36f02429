"""mftr: trust-region optimization with low-fidelity corrective steps.

Minimizes regularized binary-classification losses with a classical
trust-region method, optionally augmented each iteration by a second step
from a reduced-space model built on sketched or SVD-projected features.
"""

from ._kernels import active_backend
from .dataset import (
    Dataset,
    LibsvmFormatError,
    load_libsvm,
    parse_libsvm,
    reduce_features,
    save_libsvm,
    serialize_libsvm,
)
from .driver import (
    BacktrackingAlpha,
    ClassicalTR,
    CorrectionResult,
    FixedAlpha,
    IterationRecord,
    SketchedTR,
    Status,
    SvdTR,
    TrustRegionConfig,
    composite_rho,
    low_fidelity_correction,
    minimize,
)
from .losses import LossKind, LossModel
from .projection import (
    Projection,
    ProjectionKind,
    gaussian_sketch,
    identity_projection,
    load_projection,
    prng_description,
    save_projection,
    sketch_seed,
    truncated_svd,
)
from .subproblem import (
    SubproblemNumericError,
    SubproblemResult,
    Termination,
    cauchy_point,
    steihaug_cg,
)

__version__ = "0.1.0"

__all__ = [
    "BacktrackingAlpha",
    "ClassicalTR",
    "CorrectionResult",
    "Dataset",
    "FixedAlpha",
    "IterationRecord",
    "LibsvmFormatError",
    "LossKind",
    "LossModel",
    "Projection",
    "ProjectionKind",
    "SketchedTR",
    "Status",
    "SubproblemNumericError",
    "SubproblemResult",
    "SvdTR",
    "Termination",
    "TrustRegionConfig",
    "active_backend",
    "cauchy_point",
    "composite_rho",
    "gaussian_sketch",
    "identity_projection",
    "load_libsvm",
    "load_projection",
    "low_fidelity_correction",
    "minimize",
    "parse_libsvm",
    "prng_description",
    "reduce_features",
    "save_libsvm",
    "save_projection",
    "serialize_libsvm",
    "sketch_seed",
    "steihaug_cg",
    "truncated_svd",
]
