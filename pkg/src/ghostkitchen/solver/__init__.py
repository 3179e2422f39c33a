from ghostkitchen.solver.fifo import fifo_insert
from ghostkitchen.solver.lns import (
    DecisionEvaluator,
    ImmediateCost,
    IterationRecord,
    SearchResult,
    SearchStats,
    ValueModel,
    VfaCost,
    expand,
    search,
)
from ghostkitchen.solver.operators import OPERATORS, apply_operator
from ghostkitchen.solver.partial import CondensedDecision, PartialDecision, condense
from ghostkitchen.solver.pdft import (
    AtpState,
    PdftResult,
    PdftSolver,
    TerminationProfile,
    TraceEvent,
    Verdict,
    Window,
    feasibility_window_order,
    initial_atp_state,
    pdft_diagnostics,
    run_pdft,
)

__all__ = [
    "OPERATORS",
    "AtpState",
    "CondensedDecision",
    "DecisionEvaluator",
    "ImmediateCost",
    "IterationRecord",
    "PartialDecision",
    "PdftResult",
    "PdftSolver",
    "SearchResult",
    "SearchStats",
    "TerminationProfile",
    "TraceEvent",
    "ValueModel",
    "Verdict",
    "VfaCost",
    "Window",
    "apply_operator",
    "condense",
    "expand",
    "feasibility_window_order",
    "fifo_insert",
    "initial_atp_state",
    "pdft_diagnostics",
    "run_pdft",
    "search",
]
