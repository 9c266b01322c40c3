"""Weighted sum-rate maximization for MIMO broadcast channels.

The broadcast problem is solved through its convex dual multiple-access form:
an ascending-weight reordering removes the need to enumerate decoding orders,
and a conjugate gradient projection loop with an exact eigenvalue-based
projection onto the sum-power PSD set finds the optimal uplink covariances.
"""

from .channel import (
    ChannelSet,
    FeasibilityReport,
    ProblemInstance,
    WeightProfile,
    ascending_permutation,
    build_instance,
    dpc_user_rates,
    evaluate_objective,
    feasibility_check,
    generate_rayleigh_channels,
    load_instance,
    mac_user_rates,
    ordering_oracle,
    random_feasible_covariances,
    save_instance,
)
from .estimator import WeightedSumRateMaximizer
from .linalg import (
    eig_hermitian,
    frobenius_distance,
    hermitian_part,
    logdet_hpd,
    nsd_part,
    psd_part,
)
from .optimizer import (
    IterationRecord,
    LineSearchStalled,
    OptimizerConfig,
    SolveResult,
    armijo_step,
    cgp_solve,
    deflect,
    gp_solve,
    weighted_gradients,
)
from .projection import (
    ProjectionOutcome,
    block_eigenvalues,
    dual_psi,
    project_sum_power,
    water_level_search,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "WeightProfile",
    "ProblemInstance",
    "FeasibilityReport",
    "ascending_permutation",
    "build_instance",
    "evaluate_objective",
    "mac_user_rates",
    "dpc_user_rates",
    "feasibility_check",
    "generate_rayleigh_channels",
    "random_feasible_covariances",
    "ordering_oracle",
    "load_instance",
    "save_instance",
    "hermitian_part",
    "eig_hermitian",
    "logdet_hpd",
    "frobenius_distance",
    "psd_part",
    "nsd_part",
    "ProjectionOutcome",
    "block_eigenvalues",
    "dual_psi",
    "water_level_search",
    "project_sum_power",
    "OptimizerConfig",
    "IterationRecord",
    "SolveResult",
    "LineSearchStalled",
    "weighted_gradients",
    "deflect",
    "armijo_step",
    "cgp_solve",
    "gp_solve",
    "WeightedSumRateMaximizer",
    "__version__",
]
