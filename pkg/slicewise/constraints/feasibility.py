from dataclasses import dataclass, field
from typing import Dict, List, Sequence

from slicewise.env.types import Scenario

from .capacity import Capacity
from .completeness import Completeness
from .consolidation import Consolidation
from .constraint import Constraint, Violation
from .latency import Latency
from .placement import Placement

ALL_CONSTRAINTS: Sequence[Constraint] = (
    Completeness(),
    Capacity(),
    Latency(),
    Consolidation(),
)


@dataclass
class FeasibilityReport:
    complete: bool
    capacity_ok: bool
    latency_ok: bool
    consolidation_ok: bool
    violated: List[Violation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return (
            self.complete
            and self.capacity_ok
            and self.latency_ok
            and self.consolidation_ok
        )

    def __bool__(self):
        return self.feasible

    def violations_of(self, constraint_id: str) -> List[Violation]:
        return [v for v in self.violated if v[0] == constraint_id]

    def to_dict(self) -> Dict[str, object]:
        """Flat form for CSV diagnostics"""
        return {
            "feasible": self.feasible,
            "complete": self.complete,
            "capacity_ok": self.capacity_ok,
            "latency_ok": self.latency_ok,
            "consolidation_ok": self.consolidation_ok,
            "violated": ";".join(f"{c}:{target}" for (c, target) in self.violated),
        }


def is_feasible(placement: Placement, scenario: Scenario) -> FeasibilityReport:
    """
    Run every constraint and collect all violations.

    Works on partial placements too: capacity, latency and consolidation are
    judged on what is assigned, and the missing slices show up as
    completeness violations.
    """
    violated: List[Violation] = []
    for constraint in ALL_CONSTRAINTS:
        violated.extend(constraint.violations(placement, scenario))
    ids = {c for (c, _) in violated}
    return FeasibilityReport(
        complete=Completeness.id not in ids,
        capacity_ok=Capacity.id not in ids,
        latency_ok=Latency.id not in ids,
        consolidation_ok=Consolidation.id not in ids,
        violated=violated,
    )
