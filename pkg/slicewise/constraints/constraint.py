from abc import ABC, abstractmethod
from typing import Any, List, Sequence, Tuple, Union

from slicewise.env.types import Scenario

from .placement import Placement

# (constraint id, slice id or infrastructure index)
Violation = Tuple[str, Union[str, int]]


class Constraint(ABC):
    """
    One family of placement constraints.

    Subclasses report every violation they find rather than stopping at the
    first, so a FeasibilityReport can list them all.
    """

    id: str = "constraint"

    def __hash__(self):
        return hash(self.__key())

    def __eq__(self, other):
        if isinstance(other, Constraint):
            return self.__key() == other.__key()
        return NotImplemented

    def __repr__(self):
        return f"{self.__class__.__name__}()"

    def __key(self):
        cls, params = self.destructure()
        return (cls, tuple(params))

    @abstractmethod
    def violations(self, placement: Placement, scenario: Scenario) -> List[Violation]:
        """
        Violations of this constraint by a possibly partial placement.

        Unassigned VNFs are skipped; completeness is its own constraint.

        :param placement: the candidate placement
        :param scenario: the slices and infrastructures it refers to
        """

    def holds(self, placement: Placement, scenario: Scenario) -> bool:
        return not self.violations(placement, scenario)

    def destructure(self) -> Tuple[type, Sequence[Any]]:
        return (self.__class__, ())
