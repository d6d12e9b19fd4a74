"""Stable roommates/marriage matchings, rotation posets, and adaptation
of a given stable matching to forced and forbidden pairs."""

from .adapt_sm import adapt_sm, adaptation_weights, min_weight_stable_marriage
from .adapt_sr import GuessVector, RankWindow, adapt, adapt_with_rank_windows, integrate
from .core import (
    AdaptQuery,
    Infeasible,
    Instance,
    Matching,
    StabilityNotion,
    blocking_pairs,
    complete_with_dummies,
    is_stable,
    pair_of,
    symmetric_difference,
    validate_instance,
)
from .errors import (
    ForcedForbiddenOverlap,
    InstanceTooLarge,
    MatchAdaptError,
    NoStableMatching,
    NotAcceptable,
    NotClosedComplete,
    NotStable,
    ResourceExhausted,
    RotationNotExposed,
    SingularRotation,
    ValidationError,
    WindowUnsatisfiable,
)
from .fileio import (
    emit_instance,
    emit_matching,
    emit_query,
    parse_graph,
    parse_instance,
    parse_matching,
    parse_query,
    poset_to_dot,
)
from .gen import (
    Graph,
    independent_set_gadget,
    local_search_forbidden_gadget,
    local_search_forced_gadget,
    random_instance,
)
from .oracle import (
    enumerate_closed_complete_subsets,
    enumerate_stable_matchings,
    oracle_adapt,
)
from .rotations import (
    Rotation,
    RotationPoset,
    StableTable,
    build_rotation_poset,
    closed_set_to_matching,
    eliminate,
    exposed_rotations,
    first_stable_matching,
    fixed_pairs,
    matching_to_closed_set,
    phase1,
    rho_of,
    stable_pairs,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
