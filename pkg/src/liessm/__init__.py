"""Lie-algebraic order-sensitivity toolkit for state-space sequence models.

The package measures how much a sequence model's answer depends on input
order: it classifies the matrix Lie algebra generated by a state-space
model, computes the Magnus terms whose brackets quantify that order
sensitivity, decomposes solvable flows into abelian layer cascades, and
generates exactly-labelled state-tracking benchmarks over finite groups.
"""

__version__ = "0.1.0"

from .algebra import (
    AlgebraReport,
    MatrixBasis,
    bracket,
    classify,
    derived_series,
    lie_closure,
    lower_central_series,
    span_append,
)
from .cascade import (
    CascadeDecomposition,
    ScalingRow,
    decompose,
    peel_split,
    scaling_experiment,
    verify_cascade,
)
from .errors import GuardError, InvariantError, LiessmError, ValidationError
from .flows import (
    FlowResult,
    PiecewisePath,
    commutator_mass,
    expm,
    generator_mass,
    logm_principal,
    magnus_terms,
    permute_segments,
    reverse_path,
    split_path,
    transition_matrix,
    truncated_flow,
)
from .groups import (
    FiniteGroup,
    RotationRecord,
    WordRecord,
    a5_rotation_elements,
    classify_group,
    compose_word,
    gen_rotation_dataset,
    gen_word_dataset,
    group_derived_series,
    group_lower_central_series,
    make_group,
    sequence_accuracy,
)
from .linalg import spectral_norm
from .lyndon import (
    BracketTree,
    bracket_tree,
    cfl_factorize,
    costandard_split,
    depth_bound,
    evaluate_bracket_tree,
    is_lyndon,
    lyndon_count,
    lyndon_words,
    width_bound,
    witt_dimension,
)
from .ssm import (
    DeepSSMSpec,
    SimErrorReport,
    SSMSpec,
    deep_simulate,
    estimate_sim_error,
    four_path_probe,
    homogenize,
    is_restricted,
    lift,
    project_lifted,
    simulate_state,
)
