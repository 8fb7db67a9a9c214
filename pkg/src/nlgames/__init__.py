"""Nonlocal games, their game graphs, and projective packings."""

from .game import (
    BudgetExceededError,
    DeterministicStrategy,
    NonlocalGame,
    NotSynchronousError,
    SynchronousTag,
    classical_value,
    eval_deterministic,
    is_symmetric,
    is_synchronous,
    make_chsh,
    make_coloring_game,
    make_homomorphism_game,
    make_independent_set_game,
    make_magic_square,
    self_losing_pairs,
    validate_synchronous,
)
from .graphs import (
    Graph,
    classical_strategy_from_independent_set,
    complement,
    independence_number,
    is_independent_set,
    perfect_classical_strategy,
)
from .quantum import (
    GeneralStrategy,
    PMEStrategy,
    ProjectivePacking,
    Tolerances,
    entangled_lower_bound,
    eval_general,
    eval_pme,
    packing_from_independent_set,
    packing_from_strategy,
    pme_from_perfect,
    strategy_from_packing,
    validate_packing,
)
from .reductions import (
    ReductionArtifact,
    game_graph,
    homomorphic_product,
    lift_pme_strategy,
    reduce_pme_to_qindependence,
    strategy_to_is_game,
    synchronous_extension,
)
from .packing_search import SearchConfig, seesaw_packing

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "classical_strategy_from_independent_set",
    "classical_value",
    "complement",
    "DeterministicStrategy",
    "entangled_lower_bound",
    "eval_deterministic",
    "eval_general",
    "eval_pme",
    "game_graph",
    "GeneralStrategy",
    "Graph",
    "homomorphic_product",
    "independence_number",
    "is_independent_set",
    "is_symmetric",
    "is_synchronous",
    "lift_pme_strategy",
    "make_chsh",
    "make_coloring_game",
    "make_homomorphism_game",
    "make_independent_set_game",
    "make_magic_square",
    "NonlocalGame",
    "NotSynchronousError",
    "packing_from_independent_set",
    "packing_from_strategy",
    "perfect_classical_strategy",
    "pme_from_perfect",
    "PMEStrategy",
    "ProjectivePacking",
    "reduce_pme_to_qindependence",
    "ReductionArtifact",
    "SearchConfig",
    "seesaw_packing",
    "self_losing_pairs",
    "strategy_from_packing",
    "strategy_to_is_game",
    "synchronous_extension",
    "SynchronousTag",
    "Tolerances",
    "validate_packing",
    "validate_synchronous",
]
