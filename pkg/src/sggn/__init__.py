"""Structure-guided Gauss-Newton training of shallow ReLU networks.

Least-squares fitting with a one-hidden-layer ReLU network, alternating
a direct solve for the output-layer (linear) parameters with a
Gauss-Newton step for the hidden-layer (nonlinear) parameters. The
Gauss-Newton matrix factors as (D(c) kron I) H(r) (D(c) kron I), so its
singular directions are exactly the neurons with zero output
coefficient; filtering those by an active set keeps every solve
positive definite without Levenberg-Marquardt-style shifting.
"""

__version__ = "0.1.0"

from .assembly import (
    ActiveSet,
    AssemblyBundle,
    active_set,
    assemble_bundle,
    assemble_layer_gn,
    assemble_mass,
    assemble_scaled_gradient,
    gn_matrix,
    reduce_system,
)
from .linalg import (
    BreakpointLayout,
    ConditionReport,
    SpdSolveReport,
    condition_sweep,
    shifted_solve,
    truncated_svd_solve,
)
from .model import (
    DegenerateNeuronError,
    Domain,
    HyperplaneDescriptor,
    NetworkParams,
    NeuronParams,
    evaluate,
    feature_vectors,
    features,
    hyperplanes,
    normalize,
)
from .optimizer import (
    IterationRecord,
    LMConfig,
    OptimizerError,
    SgGNConfig,
    initialize,
    line_search,
    run_lm,
    run_sggn,
    sggn_step,
)
from .problem import (
    ConfigError,
    ProblemSpec,
    TargetFunction,
    WeightedPointSet,
    build_point_set,
    builtin_target,
    load_problem_spec,
    loss,
)

__all__ = [
    "ActiveSet",
    "AssemblyBundle",
    "BreakpointLayout",
    "ConditionReport",
    "ConfigError",
    "DegenerateNeuronError",
    "Domain",
    "HyperplaneDescriptor",
    "IterationRecord",
    "LMConfig",
    "NetworkParams",
    "NeuronParams",
    "OptimizerError",
    "ProblemSpec",
    "SgGNConfig",
    "SpdSolveReport",
    "TargetFunction",
    "WeightedPointSet",
    "active_set",
    "assemble_bundle",
    "assemble_layer_gn",
    "assemble_mass",
    "assemble_scaled_gradient",
    "build_point_set",
    "builtin_target",
    "condition_sweep",
    "evaluate",
    "feature_vectors",
    "features",
    "gn_matrix",
    "hyperplanes",
    "initialize",
    "line_search",
    "load_problem_spec",
    "loss",
    "normalize",
    "reduce_system",
    "run_lm",
    "run_sggn",
    "sggn_step",
    "shifted_solve",
    "truncated_svd_solve",
]
