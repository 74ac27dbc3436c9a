"""Discrete de Rham complexes of polar splines on solid toroidal domains."""

from .bsplines import (
    DerivativeBasis,
    KnotVector,
    SplineSpace,
    difference_matrix,
    eval_basis,
    eval_derivative,
    eval_spline,
    is_dta_compatible,
    make_uniform_open_knots,
    periodic_h0,
    periodic_h1,
)
from .extraction import (
    EbarBlock,
    ExtractionSet,
    PolarCounts,
    assemble_3d,
    ebar_block,
    extraction_e0,
    extraction_e01,
    extraction_e10,
    extraction_e2,
    polar_counts,
    reduced_basis_eval,
    reduced_basis_values,
)
from .geometry import (
    SingularityProximityError,
    SplineMap,
    build_geometry_g,
    build_polar_map,
    eval_map_and_jacobian,
    polar_basis_smoothness_probe,
    polar_smoothness_probe,
    pushforward_eval,
)
from .incidence import (
    CohomologyReport,
    IncidenceSet,
    build_d0,
    build_d1,
    build_d2,
    build_incidence,
    cohomology_dimensions,
    divergence_preimage,
    verify_commutation,
)
from .tensor import (
    LEVEL_PATTERNS,
    TensorComplex,
    VecIndexMap,
    build_tensor_sequence,
    wrap1,
)
from .torus import FieldCoefficients, PolarComplex, TorusComplexSpec, build_complex
from .iotools import ComplexConfig, load_config, read_triplet, write_bundle, write_triplet
from .verification import Tolerances, VerificationReport, run_verification

__version__ = "0.1.0"
