from ghostkitchen._defaults import EPS
from ghostkitchen.config import (
    CookSharing,
    DemandConfig,
    GeoConfig,
    LnsConfig,
    OracleConfig,
    PrepTimeConfig,
    ProblemConfig,
    RunConfig,
    Scenario,
    ServiceTimeConfig,
    TrainConfig,
    load_run_config,
)
from ghostkitchen.errors import (
    CheckpointError,
    ConfigError,
    GhostKitchenError,
    IncompleteEpisodeError,
    OracleCapError,
    PlanIntegrityError,
    PlanViolationError,
    UnknownLocationError,
)
from ghostkitchen.instances import (
    PRESETS,
    build_facility,
    preset,
    resolve_scenario,
    sample_day,
    sample_days,
)
from ghostkitchen.kpi import KpiReport, aggregate, compute_kpis
from ghostkitchen.model import (
    Decision,
    Delivery,
    Facility,
    Order,
    Plan,
    State,
    Trip,
    advance,
    check_decision,
    marginal_cost,
    plan_delay,
    transition,
    validate_plan,
)
from ghostkitchen.oracle import oracle_atp, oracle_decision_space
from ghostkitchen.policies import Policy, PolicyKind
from ghostkitchen.runner import run_days, run_policies
from ghostkitchen.simulation import EpisodeLog, realized_delay_ledger, run_episode
from ghostkitchen.travel import KITCHEN, Location, TravelTimeProvider, Zone

__all__ = [
    "EPS",
    "KITCHEN",
    "PRESETS",
    "CheckpointError",
    "ConfigError",
    "CookSharing",
    "Decision",
    "Delivery",
    "DemandConfig",
    "EpisodeLog",
    "Facility",
    "GeoConfig",
    "GhostKitchenError",
    "IncompleteEpisodeError",
    "KpiReport",
    "LnsConfig",
    "Location",
    "OracleCapError",
    "OracleConfig",
    "Order",
    "Plan",
    "PlanIntegrityError",
    "PlanViolationError",
    "Policy",
    "PolicyKind",
    "PrepTimeConfig",
    "ProblemConfig",
    "RunConfig",
    "Scenario",
    "ServiceTimeConfig",
    "State",
    "TrainConfig",
    "TravelTimeProvider",
    "Trip",
    "UnknownLocationError",
    "Zone",
    "advance",
    "aggregate",
    "build_facility",
    "check_decision",
    "compute_kpis",
    "load_run_config",
    "marginal_cost",
    "oracle_atp",
    "oracle_decision_space",
    "plan_delay",
    "preset",
    "realized_delay_ledger",
    "resolve_scenario",
    "run_days",
    "run_episode",
    "run_policies",
    "sample_day",
    "sample_days",
    "transition",
    "validate_plan",
]
