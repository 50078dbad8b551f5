from .catalog import (
    DEFAULT_CONSOLIDATION,
    DEFAULT_INFRASTRUCTURES,
    DEFAULT_LATENCY_BUDGETS_MS,
    DEFAULT_TYPE_PROBABILITIES,
    DEFAULT_VNFS,
    SLA_SCALE_MS,
    ScenarioConfig,
    default_catalog,
    default_latency_model,
    load_scenario_config,
    scenario_config_from_dict,
)
from .scenario import (
    apply_lookup_demands,
    build_request,
    generate_scenario,
    load_scenario,
    sample_link_latency,
    slice_total_demand,
    vnfs_total_demand,
)
from .types import (
    CostForm,
    Infrastructure,
    LatencyModel,
    LinkLatency,
    Plane,
    Scenario,
    SliceRequest,
    SliceType,
    Tier,
    VnfSpec,
)
