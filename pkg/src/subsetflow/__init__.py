"""Lipschitz retractions between finite subset spaces of Euclidean space."""

from .flow import (
    DivergenceError,
    FlowParams,
    FlowState,
    FlowTrace,
    RetractionResult,
    SingularConfigError,
    flow_velocity,
    grad_phi,
    integrate_batch,
    integrate_to_collision,
    phi,
    retract_chain,
    retract_configs,
    retract_once,
    retraction_stages,
)
from .subset_space import (
    FiniteSubset,
    Matching,
    NoCertifiedMatching,
    canonicalize,
    hausdorff_distance,
    lipschitz_bound,
    match_labels,
    separation,
)

__version__ = "0.1.0"
