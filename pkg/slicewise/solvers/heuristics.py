"""
Greedy baselines. Each places VNFs one at a time (slices in arrival order,
VNFs in catalog order) and never overcommits capacity, but none of them
looks at latency budgets or consolidation.

A slice may straddle tiers: spilling happens per VNF.
"""

import logging
import time
from typing import Callable, List, Optional, Sequence

import numpy as onp

from slicewise.constraints import CAPACITY_TOLERANCE, Placement
from slicewise.env.types import Scenario, Tier, VnfSpec

from .solver import SolveResult, finish_result, infeasible_result

logger = logging.getLogger(__name__)

# (vnf, cpu used, mem used) -> chosen infrastructure or None
Chooser = Callable[[VnfSpec, onp.ndarray, onp.ndarray], Optional[int]]

_TIER_ORDER = {Tier.edge: 0, Tier.distributed: 1, Tier.central: 2}


def fitting(
    vnf: VnfSpec, cpu_used: onp.ndarray, mem_used: onp.ndarray, scenario: Scenario
) -> onp.ndarray:
    """Boolean mask of infrastructures with room for the VNF"""
    return (cpu_used + vnf.cpu_demand <= scenario.cpu_capacity + CAPACITY_TOLERANCE) & (
        mem_used + vnf.mem_demand <= scenario.mem_capacity + CAPACITY_TOLERANCE
    )


def first_fit(order: Sequence[int], scenario: Scenario) -> Chooser:
    def choose(vnf, cpu_used, mem_used):
        mask = fitting(vnf, cpu_used, mem_used, scenario)
        return next((m for m in order if mask[m]), None)

    return choose


def greedy_place(scenario: Scenario, choose: Chooser, algorithm: str) -> SolveResult:
    """
    Run a per-VNF greedy rule over the scenario.

    :return: the full placement, or a None placement as soon as some VNF fits
        nowhere
    """
    started = time.perf_counter()
    n = scenario.n_infrastructures
    cpu_used = onp.zeros(n)
    mem_used = onp.zeros(n)
    placement = Placement()
    for request in sorted(scenario.requests, key=lambda r: r.arrival_index):
        for (i, vnf) in enumerate(request.vnfs):
            m = choose(vnf, cpu_used, mem_used)
            if m is None:
                wall_time = time.perf_counter() - started
                logger.info(
                    "%s: %s of slice %s fits nowhere", algorithm, vnf.name, request.id
                )
                return infeasible_result(algorithm, wall_time)
            placement.assign(request.id, i, m)
            cpu_used[m] += vnf.cpu_demand
            mem_used[m] += vnf.mem_demand
    wall_time = time.perf_counter() - started
    return finish_result(placement, scenario, algorithm, wall_time)


def place_cost_aware(scenario: Scenario) -> SolveResult:
    """Cheapest infrastructure with room, ties by index"""
    return greedy_place(scenario, first_fit(scenario.cost_order, scenario), "cost")


def performance_order(scenario: Scenario) -> List[int]:
    """Edge first, then distributed, then central; ties by index"""
    return sorted(
        range(scenario.n_infrastructures),
        key=lambda m: (_TIER_ORDER[scenario.infrastructures[m].tier], m),
    )


def place_performance_aware(scenario: Scenario) -> SolveResult:
    """Infrastructure closest to users with room"""
    return greedy_place(scenario, first_fit(performance_order(scenario), scenario), "perf")


def place_random(scenario: Scenario, rng: onp.random.Generator) -> SolveResult:
    """Uniform choice among the infrastructures with room"""

    def choose(vnf, cpu_used, mem_used):
        candidates = onp.flatnonzero(fitting(vnf, cpu_used, mem_used, scenario))
        if candidates.size == 0:
            return None
        return int(rng.choice(candidates))

    return greedy_place(scenario, choose, "random")


def balance_scores(
    vnf: VnfSpec, cpu_used: onp.ndarray, mem_used: onp.ndarray, scenario: Scenario
) -> onp.ndarray:
    """Dominant-resource utilization of each infrastructure after placing vnf"""
    cpu_util = (cpu_used + vnf.cpu_demand) / scenario.cpu_capacity
    mem_util = (mem_used + vnf.mem_demand) / scenario.mem_capacity
    return onp.maximum(cpu_util, mem_util)


def place_load_balance(scenario: Scenario) -> SolveResult:
    """Infrastructure with the lowest post-placement utilization, ties by index"""

    def choose(vnf, cpu_used, mem_used):
        mask = fitting(vnf, cpu_used, mem_used, scenario)
        if not mask.any():
            return None
        scores = onp.where(mask, balance_scores(vnf, cpu_used, mem_used, scenario), onp.inf)
        return int(onp.argmin(scores))

    return greedy_place(scenario, choose, "balance")
