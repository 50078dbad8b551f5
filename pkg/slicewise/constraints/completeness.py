from typing import List

from slicewise.env.types import Scenario

from .constraint import Constraint, Violation
from .placement import Placement


def check_complete(placement: Placement, scenario: Scenario) -> bool:
    """True iff every VNF of every request is assigned"""
    return all(
        (request.id, i) in placement
        for request in scenario.requests
        for i in range(len(request.vnfs))
    )


def require_complete(placement: Placement, scenario: Scenario):
    if not check_complete(placement, scenario):
        raise ValueError("Placement is incomplete")


class Completeness(Constraint):
    id = "complete"

    def violations(self, placement: Placement, scenario: Scenario) -> List[Violation]:
        return [
            (self.id, request.id)
            for request in scenario.requests
            if None in placement.for_request(request)
        ]
