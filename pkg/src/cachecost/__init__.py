"""Cost-aware cache provisioning for ISPs with priced external links.

Computes optimal cache sizing, object placement and path selection under two
objectives (minimum retrieval cost vs. maximum hit-ratio), certifies the
greedy planners against a brute-force oracle, and ships an experiment
harness contrasting the two designs over Zipf workloads.
"""
from .model import (
    AvailabilityMap,
    Catalog,
    EvaluationReport,
    InfeasiblePlanError,
    Instance,
    InstanceError,
    Link,
    LinkCategory,
    LinkTopology,
    PlacementPlan,
    UnsupportedPlanError,
    ValidationVerdict,
    evaluate,
    validate,
)
from .planner import (
    RankedObject,
    cheapest_links,
    lower_bound_cost,
    plan_max_hit,
    plan_min_cost,
    potential_costs,
    ranked_objects,
)
from .oracle import (
    SearchSpaceExceeded,
    SmallInstanceLimits,
    brute_force_max_hit,
    brute_force_min_cost,
    certify,
    random_small_instance,
)
from .scenario import (
    ScenarioConfig,
    make_instance,
    three_link_topology,
    sample_availability,
    scenario_rng,
    zipf_catalog,
)
from .experiment import (
    RequestTrace,
    ScenarioResult,
    SweepPoint,
    SweepSpec,
    build_request_trace,
    confidence_interval,
    replay_requests,
    run_point,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AvailabilityMap",
    "Catalog",
    "EvaluationReport",
    "InfeasiblePlanError",
    "Instance",
    "InstanceError",
    "Link",
    "LinkCategory",
    "LinkTopology",
    "PlacementPlan",
    "RankedObject",
    "RequestTrace",
    "ScenarioConfig",
    "ScenarioResult",
    "SearchSpaceExceeded",
    "SmallInstanceLimits",
    "SweepPoint",
    "SweepSpec",
    "UnsupportedPlanError",
    "ValidationVerdict",
    "brute_force_max_hit",
    "brute_force_min_cost",
    "build_request_trace",
    "certify",
    "cheapest_links",
    "confidence_interval",
    "evaluate",
    "lower_bound_cost",
    "make_instance",
    "three_link_topology",
    "plan_max_hit",
    "plan_min_cost",
    "potential_costs",
    "random_small_instance",
    "ranked_objects",
    "replay_requests",
    "run_point",
    "run_sweep",
    "sample_availability",
    "scenario_rng",
    "validate",
    "zipf_catalog",
]
