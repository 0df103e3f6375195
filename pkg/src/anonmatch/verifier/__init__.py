from .modelcheck import ModelCheckResult, StateSpaceTooLarge, model_check
from .monitors import Violation, configurations, single_progress_tally, monitor_trace, replay_final
from .specs import (
    NodeClass,
    Potential,
    SpecReport,
    brute_force_maximal_matchings,
    check_LN,
    check_M,
    classify,
    k_bound,
    lex_le,
    lex_lt,
    matched_pairs,
    potential,
    translate_names,
)

__all__ = [
    "ModelCheckResult", "NodeClass", "Potential", "SpecReport", "StateSpaceTooLarge", "Violation",
    "brute_force_maximal_matchings", "check_LN", "check_M", "classify", "configurations", "k_bound", "single_progress_tally",
    "lex_le", "lex_lt", "matched_pairs", "model_check", "monitor_trace", "potential", "replay_final",
    "translate_names",
]
