from dataclasses import dataclass, field
import math
from typing import Optional, Tuple

import pandas as pd

from slicewise.constraints import Placement, is_feasible, placement_cost
from slicewise.env.types import Scenario


@dataclass
class SolveResult:
    """
    Outcome of one placement algorithm on one scenario.

    placement is None when the algorithm could not place every slice it was
    asked to place; the cost is then infinite. Slices an algorithm chose to
    reject (the RL scheduler does this) are listed in rejected and left out
    of placement and cost.
    """

    placement: Optional[Placement]
    cost: float
    nodes_explored: int = 0
    wall_time: float = 0.0
    optimal: bool = False
    rejected: Tuple[str, ...] = ()
    parallel_wall_time: Optional[float] = None
    algorithm: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def placed(self) -> bool:
        return self.placement is not None

    def placed_scenario(self, scenario: Scenario) -> Scenario:
        """The scenario restricted to slices this result actually placed"""
        if self.placement is None:
            return scenario.subset(())
        rejected = set(self.rejected)
        return scenario.subset(r.id for r in scenario.requests if r.id not in rejected)

    def to_frame(self, scenario: Scenario) -> pd.DataFrame:
        if self.placement is None:
            return pd.DataFrame(columns=["slice_id", "vnf", "infra", "tier"])
        return self.placement.to_frame(scenario)


def infeasible_result(algorithm: str, wall_time: float = 0.0, **kwargs) -> SolveResult:
    return SolveResult(
        placement=None, cost=math.inf, wall_time=wall_time, algorithm=algorithm, **kwargs
    )


def finish_result(
    placement: Placement,
    scenario: Scenario,
    algorithm: str,
    wall_time: float,
    **kwargs,
) -> SolveResult:
    """Cost a finished placement over the slices it covers"""
    rejected = tuple(kwargs.pop("rejected", ()))
    covered = scenario.subset(r.id for r in scenario.requests if r.id not in rejected)
    return SolveResult(
        placement=placement,
        cost=placement_cost(placement, covered),
        wall_time=wall_time,
        algorithm=algorithm,
        rejected=rejected,
        **kwargs,
    )


def check_result(result: SolveResult, scenario: Scenario) -> bool:
    """A present placement is feasible and its cost matches placement_cost"""
    if result.placement is None:
        return True
    covered = result.placed_scenario(scenario)
    return bool(is_feasible(result.placement, covered)) and result.cost == (
        placement_cost(result.placement, covered)
    )
