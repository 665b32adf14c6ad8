"""Solver for turn-based stochastic games with lexicographic
reachability and safety objectives."""

from .errors import FormatError, LexsgError, LimitExceeded, ModelError, SolverError
from .game import Distribution, Owner, StochasticGame, parse_game, serialize_game
from .lex import (
    FinalSetReport,
    LexValueAssignment,
    SolveReport,
    SolveStats,
    StagedStrategy,
    decide,
    determinacy_check,
    evaluate_strategy,
    export_strategy,
    final_set,
    parse_strategy,
    solve_absorbing,
    solve_lex,
)
from .objectives import (
    LexObjective,
    ObjectiveKind,
    QuantifiedLexObjective,
    QuantifiedObjective,
    lex_compare,
    quantify,
)
from .single import (
    MDStrategy,
    SolverConfig,
    almost_sure_reach_under,
    locally_optimal_filter,
    solve_reach,
    solve_safe,
)

__version__ = "0.1.0"
