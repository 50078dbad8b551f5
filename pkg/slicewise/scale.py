from dataclasses import dataclass, field

import numpy as onp


@dataclass
class Scale:
    """
    Linear map between a true range [low, high] and [0, 1].

    Used to normalize resource components of the MDP state so that values
    of very different magnitude (0.128 GiB against 64 GiB) reach the value
    network on a common footing.
    """

    low: float
    high: float
    width: float = field(init=False)

    def __post_init__(self):
        if self.high <= self.low:
            raise ValueError(f"Scale needs high > low, got [{self.low}, {self.high}]")
        self.width = self.high - self.low

    def __hash__(self):
        return hash((Scale, self.low, self.high))

    def __eq__(self, other):
        if isinstance(other, Scale):
            return (self.low, self.high) == (other.low, other.high)
        return NotImplemented

    def normalize_point(self, point):
        return (point - self.low) / self.width

    def denormalize_point(self, point):
        return (point * self.width) + self.low

    def normalize_points(self, points):
        return self.normalize_point(onp.asarray(points, dtype=onp.float64))

    def denormalize_points(self, points):
        return self.denormalize_point(onp.asarray(points, dtype=onp.float64))
