import math
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

import numpy as onp
import pandas as pd

from slicewise.env.types import Scenario, SliceRequest

Key = Tuple[str, int]


class Placement:
    """
    Assignment of (slice id, VNF index) to an infrastructure index.

    Possibly partial while a solver or the MDP is still building it. Each key
    maps to exactly one infrastructure by construction.
    """

    def __init__(self, assignment: Optional[Mapping[Key, int]] = None):
        self._assignment: Dict[Key, int] = {}
        for (key, m) in (assignment or {}).items():
            self.assign(key[0], key[1], m)

    def __repr__(self):
        return f"Placement({dict(sorted(self._assignment.items()))})"

    def __eq__(self, other):
        if isinstance(other, Placement):
            return self._assignment == other._assignment
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self._assignment.items())))

    def __len__(self):
        return len(self._assignment)

    def __contains__(self, key) -> bool:
        return key in self._assignment

    def __iter__(self) -> Iterator[Key]:
        return iter(sorted(self._assignment))

    def __getitem__(self, key: Key) -> int:
        return self._assignment[key]

    def get(self, slice_id: str, vnf_index: int) -> Optional[int]:
        return self._assignment.get((slice_id, vnf_index))

    def items(self) -> Iterable[Tuple[Key, int]]:
        return sorted(self._assignment.items())

    def assign(self, slice_id: str, vnf_index: int, m: int) -> "Placement":
        if m < 0:
            raise ValueError(f"Infrastructure index must be >= 0, got {m}")
        self._assignment[(slice_id, vnf_index)] = int(m)
        return self

    def unassign(self, slice_id: str, vnf_index: int):
        self._assignment.pop((slice_id, vnf_index), None)

    def drop_slice(self, slice_id: str):
        for key in [k for k in self._assignment if k[0] == slice_id]:
            del self._assignment[key]

    def copy(self) -> "Placement":
        placement = Placement()
        placement._assignment = dict(self._assignment)
        return placement

    def merge(self, other: "Placement") -> "Placement":
        overlap = set(self._assignment) & set(other._assignment)
        if overlap:
            raise ValueError(f"Placements overlap on {sorted(overlap)}")
        merged = self.copy()
        merged._assignment.update(other._assignment)
        return merged

    def slice_ids(self) -> Tuple[str, ...]:
        return tuple(sorted({slice_id for (slice_id, _) in self._assignment}))

    def for_request(self, request: SliceRequest) -> Tuple[Optional[int], ...]:
        """Infrastructure of each VNF of the request, None where unassigned"""
        return tuple(
            self._assignment.get((request.id, i)) for i in range(len(request.vnfs))
        )

    def restricted_to(self, slice_ids: Iterable[str]) -> "Placement":
        keep = set(slice_ids)
        return Placement({k: m for (k, m) in self._assignment.items() if k[0] in keep})

    def used_resources(self, scenario: Scenario) -> Tuple[onp.ndarray, onp.ndarray]:
        """
        Cores and GiB consumed per infrastructure by the assigned VNFs.

        Sums are taken with math.fsum per infrastructure so results do not
        depend on assignment order.
        """
        n = scenario.n_infrastructures
        cpu_terms = [[] for _ in range(n)]  # type: ignore
        mem_terms = [[] for _ in range(n)]  # type: ignore
        for ((slice_id, i), m) in self._assignment.items():
            vnf = scenario.request_by_id[slice_id].vnfs[i]
            if m >= n:
                raise ValueError(f"Infrastructure index {m} out of range")
            cpu_terms[m].append(vnf.cpu_demand)
            mem_terms[m].append(vnf.mem_demand)
        return (
            onp.array([math.fsum(t) for t in cpu_terms], dtype=onp.float64),
            onp.array([math.fsum(t) for t in mem_terms], dtype=onp.float64),
        )

    def to_frame(self, scenario: Scenario) -> pd.DataFrame:
        """Rows of (slice_id, vnf, infra, tier) in arrival then catalog order"""
        rows = []
        for request in scenario.requests:
            for (i, vnf) in enumerate(request.vnfs):
                m = self._assignment.get((request.id, i))
                if m is None:
                    continue
                rows.append(
                    {
                        "slice_id": request.id,
                        "vnf": vnf.name,
                        "infra": m,
                        "tier": scenario.infrastructures[m].tier.value,
                    }
                )
        return pd.DataFrame(rows, columns=["slice_id", "vnf", "infra", "tier"])

    @classmethod
    def from_frame(cls, df: pd.DataFrame, scenario: Scenario) -> "Placement":
        placement = cls()
        for row in df.itertuples(index=False):
            request = scenario.request_by_id[str(row.slice_id)]
            names = [v.name for v in request.vnfs]
            placement.assign(request.id, names.index(row.vnf), int(row.infra))
        return placement
