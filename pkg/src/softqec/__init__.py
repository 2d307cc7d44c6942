"""Surface-code simulation and decoding with soft measurement information."""

from .chains import Chain, HyperGraph, add, boundary, restricted_boundary
from .decoding import DecodingGraph, build, export_graph, merge_parallel
from .measurement import (
    AmplitudeDampingModel,
    GaussianModel,
    SoftModel,
    average_flip_prob,
    hardened_flip_prob,
    optimize_measurement,
    sigma_for_hardened,
)
from .montecarlo import (
    PointResult,
    PointSpec,
    ThresholdFit,
    TrialResult,
    TrialStats,
    estimate,
    fit_threshold,
    rate_per_round,
    run_point,
    run_trial,
    sweep,
)
from .mwpm import DecodeResult, MatchingDecoder, exact_mwpm
from .noise import (
    CircuitSpec,
    GraphicalModel,
    ModelPair,
    SoftOutcomeRecord,
    build_circuit_model,
    build_parametric_circuit_model,
    build_pheno_model,
    sample,
    syndrome,
    syndrome_array,
    syndrome_circuit,
    validate,
)
from .surface import (
    BaseGraph,
    PauliOperator,
    RotatedCode,
    build_base_graph,
    build_rotated_code,
    classify_residual,
    weighted_min_distance,
)
from .unionfind import UnionFindDecoder

__all__ = [
    "Chain",
    "HyperGraph",
    "add",
    "boundary",
    "restricted_boundary",
    "DecodingGraph",
    "build",
    "export_graph",
    "merge_parallel",
    "AmplitudeDampingModel",
    "GaussianModel",
    "SoftModel",
    "average_flip_prob",
    "hardened_flip_prob",
    "optimize_measurement",
    "sigma_for_hardened",
    "PointResult",
    "PointSpec",
    "ThresholdFit",
    "TrialResult",
    "TrialStats",
    "estimate",
    "fit_threshold",
    "rate_per_round",
    "run_point",
    "run_trial",
    "sweep",
    "DecodeResult",
    "MatchingDecoder",
    "exact_mwpm",
    "CircuitSpec",
    "GraphicalModel",
    "ModelPair",
    "SoftOutcomeRecord",
    "build_circuit_model",
    "build_parametric_circuit_model",
    "build_pheno_model",
    "sample",
    "syndrome",
    "syndrome_array",
    "syndrome_circuit",
    "validate",
    "BaseGraph",
    "PauliOperator",
    "RotatedCode",
    "build_base_graph",
    "build_rotated_code",
    "classify_residual",
    "weighted_min_distance",
    "UnionFindDecoder",
]

__version__ = "0.1.0"
