import math

from slicewise.env.types import CostForm, Scenario, VnfSpec

from .completeness import require_complete
from .placement import Placement


def cost_weight(vnf: VnfSpec, cost_form: CostForm = "product") -> float:
    """Per-VNF factor multiplied by an infrastructure's unit cost"""
    if cost_form == "product":
        return vnf.cpu_demand * vnf.mem_demand
    elif cost_form == "weighted_sum":
        return vnf.cpu_demand + vnf.mem_demand
    raise NotImplementedError(f"Unknown cost form {cost_form!r}")


def vnf_cost(vnf: VnfSpec, unit_cost: float, cost_form: CostForm = "product") -> float:
    return unit_cost * cost_weight(vnf, cost_form)


def placement_cost(placement: Placement, scenario: Scenario) -> float:
    """
    Hourly cost of a complete placement: the sum over VNFs of the host's
    unit cost times the VNF's cost weight.

    The sum is exactly rounded, so the result is independent of the order in
    which slices were placed.

    :raises ValueError: if the placement is incomplete
    """
    require_complete(placement, scenario)
    return partial_cost(placement, scenario)


def partial_cost(placement: Placement, scenario: Scenario) -> float:
    """placement_cost over the assigned VNFs only"""
    terms = []
    for ((slice_id, i), m) in placement.items():
        vnf = scenario.request_by_id[slice_id].vnfs[i]
        unit_cost = scenario.infrastructures[m].unit_cost
        terms.append(vnf_cost(vnf, unit_cost, scenario.cost_form))
    return math.fsum(terms)
