from typing import List

import numpy as onp

from slicewise.env.types import Scenario

from .completeness import require_complete
from .constraint import Constraint, Violation
from .placement import Placement

# Absolute slack in cores/GiB when comparing float sums against capacity
CAPACITY_TOLERANCE = 1e-9


def fits(used, demand, capacity) -> bool:
    headroom = onp.asarray(capacity) + CAPACITY_TOLERANCE
    return bool(onp.all(onp.asarray(used) + demand <= headroom))


def over_capacity(placement: Placement, scenario: Scenario) -> List[int]:
    """Infrastructures whose cpu or mem is overcommitted"""
    cpu, mem = placement.used_resources(scenario)
    over = (cpu > scenario.cpu_capacity + CAPACITY_TOLERANCE) | (
        mem > scenario.mem_capacity + CAPACITY_TOLERANCE
    )
    return [int(m) for m in onp.flatnonzero(over)]


def check_capacity(placement: Placement, scenario: Scenario) -> bool:
    """
    Assigned cpu and mem stay within every infrastructure's capacity.

    :raises ValueError: if the placement is incomplete
    """
    require_complete(placement, scenario)
    return not over_capacity(placement, scenario)


class Capacity(Constraint):
    id = "capacity"

    def violations(self, placement: Placement, scenario: Scenario) -> List[Violation]:
        return [(self.id, m) for m in over_capacity(placement, scenario)]
