"""
Domain types for the multi-cloud infrastructure and the slices placed on it.

All types are frozen dataclasses and safe to share across threads.
"""

from dataclasses import dataclass
from enum import Enum
import math
from typing import Dict, Iterable, Mapping, Optional, Tuple

from backports.cached_property import cached_property
import numpy as onp
from typing_extensions import Literal

CostForm = Literal["product", "weighted_sum"]


class SliceType(Enum):
    URLLC = "URLLC"
    eMBB = "eMBB"
    mMTC = "mMTC"

    @classmethod
    def parse(cls, tag: str) -> "SliceType":
        """Case-insensitive lookup by tag, e.g. "embb" -> SliceType.eMBB"""
        for member in cls:
            if member.value.lower() == str(tag).strip().lower():
                return member
        raise ValueError(f"Unknown slice type tag {tag!r}")

    @property
    def index(self) -> int:
        return list(SliceType).index(self)


class Plane(Enum):
    user = "user"
    control = "control"


class Tier(Enum):
    edge = "edge"
    distributed = "distributed"
    central = "central"

    @classmethod
    def parse(cls, tag: str) -> "Tier":
        try:
            return cls(str(tag).strip().lower())
        except ValueError:
            raise ValueError(f"Unknown tier {tag!r}")


@dataclass(frozen=True)
class VnfSpec:
    name: str
    plane: Plane
    cpu_demand: float  # cores
    mem_demand: float  # GiB
    chain_index: Optional[int] = None

    def __post_init__(self):
        if not (self.cpu_demand > 0 and self.mem_demand > 0):
            raise ValueError(
                f"VNF {self.name} needs positive demands, "
                f"got ({self.cpu_demand}, {self.mem_demand})"
            )
        if self.plane is Plane.user and self.chain_index is None:
            raise ValueError(f"User-plane VNF {self.name} needs a chain_index")
        if self.plane is Plane.control and self.chain_index is not None:
            raise ValueError(f"Control-plane VNF {self.name} has a chain_index")

    @property
    def cost_weight(self) -> float:
        """r_v^cpu * r_v^mem, the per-VNF factor of the product cost form"""
        return self.cpu_demand * self.mem_demand


@dataclass(frozen=True)
class Infrastructure:
    id: int
    tier: Tier
    cpu_capacity: float  # cores
    mem_capacity: float  # GiB
    unit_cost: float  # $/hour
    dn_latency_ms: float

    def __post_init__(self):
        if not (self.cpu_capacity > 0 and self.mem_capacity > 0):
            raise ValueError(f"Infrastructure {self.id} needs positive capacities")
        if self.unit_cost < 0:
            raise ValueError(f"Infrastructure {self.id} has negative unit cost")
        if self.dn_latency_ms < 0:
            raise ValueError(f"Infrastructure {self.id} has negative DN latency")


@dataclass(frozen=True)
class LinkLatency:
    mean_ms: float
    stddev_ms: float

    def __post_init__(self):
        if self.mean_ms < 0 or self.stddev_ms < 0:
            raise ValueError(f"Latency parameters must be >= 0, got {self}")

    @classmethod
    def compose(cls, *links: "LinkLatency") -> "LinkLatency":
        """Sum of independent normal hops"""
        mean = math.fsum(link.mean_ms for link in links)
        variance = math.fsum(link.stddev_ms ** 2 for link in links)
        return cls(mean, math.sqrt(variance))


ZERO_LINK = LinkLatency(0.0, 0.0)


@dataclass(frozen=True)
class LatencyModel:
    """
    Pairwise inter-infrastructure latency, each pair a normal distribution.

    Build with `LatencyModel.from_links`, which mirrors the given pairs and
    fills the zero diagonal.
    """

    pairwise: Mapping[Tuple[int, int], LinkLatency]

    def __post_init__(self):
        for (m, m_prime), link in self.pairwise.items():
            if m == m_prime and link != ZERO_LINK:
                raise ValueError(f"Diagonal entry ({m}, {m}) must be (0, 0)")
            mirrored = self.pairwise.get((m_prime, m))
            if mirrored != link:
                raise ValueError(f"Latency model is not symmetric at ({m}, {m_prime})")

    @classmethod
    def from_links(
        cls, n_infrastructures: int, links: Mapping[Tuple[int, int], LinkLatency]
    ) -> "LatencyModel":
        pairwise: Dict[Tuple[int, int], LinkLatency] = {}
        for m in range(n_infrastructures):
            pairwise[(m, m)] = ZERO_LINK
        for (m, m_prime), link in links.items():
            if m == m_prime:
                continue
            for key in ((m, m_prime), (m_prime, m)):
                if key in pairwise and pairwise[key] != link:
                    raise ValueError(f"Conflicting latency entries for {key}")
                pairwise[key] = link
        for m in range(n_infrastructures):
            for m_prime in range(n_infrastructures):
                if (m, m_prime) not in pairwise:
                    raise ValueError(f"Missing latency entry for ({m}, {m_prime})")
        return cls(pairwise)

    def link(self, m: int, m_prime: int) -> LinkLatency:
        try:
            return self.pairwise[(m, m_prime)]
        except KeyError:
            raise KeyError(f"Unknown infrastructure pair ({m}, {m_prime})")

    def mean(self, m: int, m_prime: int) -> float:
        return self.link(m, m_prime).mean_ms

    @property
    def size(self) -> int:
        return 1 + max(m for (m, _) in self.pairwise)


@dataclass(frozen=True)
class SliceRequest:
    id: str
    slice_type: SliceType
    vnfs: Tuple[VnfSpec, ...]
    latency_budget_ms: float
    consolidation_required: bool
    arrival_index: int

    def __post_init__(self):
        if not self.latency_budget_ms > 0:
            raise ValueError(f"Slice {self.id} needs a positive latency budget")
        if not self.vnfs:
            raise ValueError(f"Slice {self.id} has no VNFs")
        names = [v.name for v in self.vnfs]
        if len(set(names)) != len(names):
            raise ValueError(f"Slice {self.id} repeats a VNF role: {names}")
        chain = sorted(v.chain_index for v in self.vnfs if v.chain_index is not None)
        if chain != list(range(len(chain))):
            raise ValueError(
                f"Slice {self.id} user-plane chain indices must be 0..n-1, got {chain}"
            )

    @cached_property
    def user_plane(self) -> Tuple[int, ...]:
        """Positions of the user-plane VNFs in self.vnfs, in chain order"""
        positions = [i for (i, v) in enumerate(self.vnfs) if v.plane is Plane.user]
        return tuple(sorted(positions, key=lambda i: self.vnfs[i].chain_index))


@dataclass(frozen=True)
class Scenario:
    infrastructures: Tuple[Infrastructure, ...]
    latency_model: LatencyModel
    requests: Tuple[SliceRequest, ...]
    rng_seed: int = 0
    cost_form: CostForm = "product"

    def __post_init__(self):
        ids = [infra.id for infra in self.infrastructures]
        if ids != list(range(len(ids))):
            raise ValueError(f"Infrastructure ids must be 0..M-1, got {ids}")
        if self.latency_model.size != len(ids):
            raise ValueError("Latency model size does not match the infrastructures")
        slice_ids = [r.id for r in self.requests]
        if len(set(slice_ids)) != len(slice_ids):
            raise ValueError("Slice ids must be unique")
        if self.cost_form not in ("product", "weighted_sum"):
            raise NotImplementedError(f"Unknown cost form {self.cost_form!r}")

    @property
    def n_infrastructures(self) -> int:
        return len(self.infrastructures)

    @cached_property
    def cpu_capacity(self) -> onp.ndarray:
        return onp.array([i.cpu_capacity for i in self.infrastructures])

    @cached_property
    def mem_capacity(self) -> onp.ndarray:
        return onp.array([i.mem_capacity for i in self.infrastructures])

    @cached_property
    def unit_costs(self) -> onp.ndarray:
        return onp.array([i.unit_cost for i in self.infrastructures])

    @cached_property
    def cost_order(self) -> Tuple[int, ...]:
        """Infrastructure indices by ascending unit cost, ties by index"""
        return tuple(
            sorted(range(self.n_infrastructures), key=lambda m: (self.unit_costs[m], m))
        )

    @cached_property
    def request_by_id(self) -> Dict[str, SliceRequest]:
        return {r.id: r for r in self.requests}

    def of_type(self, slice_type: SliceType) -> Tuple[SliceRequest, ...]:
        return tuple(r for r in self.requests if r.slice_type is slice_type)

    def subset(self, slice_ids: Iterable[str]) -> "Scenario":
        """The same infrastructure with only the given slices, in arrival order"""
        keep = set(slice_ids)
        return Scenario(
            self.infrastructures,
            self.latency_model,
            tuple(r for r in self.requests if r.id in keep),
            self.rng_seed,
            self.cost_form,
        )
