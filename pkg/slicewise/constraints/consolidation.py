from typing import List

from slicewise.env.types import Scenario, SliceRequest

from .constraint import Constraint, Violation
from .placement import Placement


def check_consolidation(placement: Placement, request: SliceRequest) -> bool:
    """
    If the request requires consolidation, all of its assigned VNFs share one
    infrastructure. Vacuously true otherwise.
    """
    if not request.consolidation_required:
        return True
    infras = {m for m in placement.for_request(request) if m is not None}
    return len(infras) <= 1


class Consolidation(Constraint):
    id = "consolidation"

    def violations(self, placement: Placement, scenario: Scenario) -> List[Violation]:
        return [
            (self.id, request.id)
            for request in scenario.requests
            if not check_consolidation(placement, request)
        ]
