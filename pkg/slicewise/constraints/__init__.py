from .capacity import CAPACITY_TOLERANCE, Capacity, check_capacity, fits, over_capacity
from .completeness import Completeness, check_complete, require_complete
from .consolidation import Consolidation, check_consolidation
from .constraint import Constraint, Violation
from .feasibility import ALL_CONSTRAINTS, FeasibilityReport, is_feasible
from .latency import (
    Latency,
    LatencyMode,
    chain_latency,
    check_latency,
    user_plane_chain,
    user_plane_latency,
    within_budget,
)
from .objective import cost_weight, partial_cost, placement_cost, vnf_cost
from .placement import Placement
