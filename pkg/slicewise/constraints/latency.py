import math
from typing import List, Optional, Sequence

import numpy as onp
from typing_extensions import Literal

from slicewise.env.scenario import sample_link_latency
from slicewise.env.types import Scenario, SliceRequest

from .constraint import Constraint, Violation
from .placement import Placement

LatencyMode = Literal["mean", "sampled"]


def chain_latency(
    chain: Sequence[int],
    scenario: Scenario,
    mode: LatencyMode = "mean",
    rng: Optional[onp.random.Generator] = None,
) -> float:
    """
    End-to-end latency of a user-plane chain given as infrastructure indices
    in chain order (DU first): the link latency of every consecutive hop plus
    the data-network latency of the last VNF's tier.

    In sampled mode each hop takes one draw from rng; the DN latency is fixed.
    """
    if not chain:
        return 0.0
    if mode == "sampled" and rng is None:
        raise ValueError("Sampled latency needs an rng")
    model = scenario.latency_model
    terms = []
    for (m, m_next) in zip(chain, chain[1:]):
        if mode == "mean":
            terms.append(model.mean(m, m_next))
        elif mode == "sampled":
            terms.append(sample_link_latency(model, m, m_next, rng))  # type: ignore
        else:
            raise NotImplementedError(f"Unknown latency mode {mode!r}")
    terms.append(scenario.infrastructures[chain[-1]].dn_latency_ms)
    return math.fsum(terms)


def user_plane_chain(placement: Placement, request: SliceRequest) -> List[int]:
    assigned = placement.for_request(request)
    chain = [assigned[i] for i in request.user_plane]
    if None in chain:
        raise ValueError(f"Slice {request.id} has an unassigned user-plane VNF")
    return chain  # type: ignore


def user_plane_latency(
    placement: Placement,
    request: SliceRequest,
    scenario: Scenario,
    mode: LatencyMode = "mean",
    rng: Optional[onp.random.Generator] = None,
) -> float:
    """
    Latency through the slice's user-plane chain, in ms.

    :param mode: "mean" uses distribution means, "sampled" draws once per hop
    :param rng: required in sampled mode
    :raises ValueError: if a user-plane VNF of the request is unassigned
    """
    return chain_latency(user_plane_chain(placement, request), scenario, mode, rng)


def within_budget(latency_ms: float, request: SliceRequest) -> bool:
    # Budgets are strict upper bounds
    return latency_ms < request.latency_budget_ms


def check_latency(
    placement: Placement, request: SliceRequest, scenario: Scenario
) -> bool:
    return within_budget(user_plane_latency(placement, request, scenario), request)


class Latency(Constraint):
    id = "latency"

    def violations(self, placement: Placement, scenario: Scenario) -> List[Violation]:
        found: List[Violation] = []
        for request in scenario.requests:
            assigned = placement.for_request(request)
            if any(assigned[i] is None for i in request.user_plane):
                continue
            if not check_latency(placement, request, scenario):
                found.append((self.id, request.id))
        return found
