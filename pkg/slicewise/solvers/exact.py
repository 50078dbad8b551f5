"""
Exhaustive branch and bound over VNF assignments.

Slices are taken in arrival order and their VNFs in catalog order; a slice
that must be consolidated is branched once as a whole. Infrastructures are
tried cheapest first, so the first leaf found is usually close to optimal.
A branch is cut when it overcommits an infrastructure, when its slice's
partial user-plane chain has no completion under the latency budget, or
when its partial cost plus a lower bound on the rest cannot beat the
incumbent. The lower bound is the largest of

- a fractional fill of the remaining demand into the remaining capacity,
  cheapest infrastructure first (ignores latency),
- every remaining item on its cheapest infrastructure that still has room
  for it on its own, and
- the cheapest latency-feasible completion of every remaining slice
  (ignores capacity).

Only one placement out of each group of equivalent ones is searched.
Control-plane VNFs with equal demands are interchangeable wherever they
sit, so their hosts must be non-decreasing in cost order along the search.
Slices with equal type, VNFs and requirements are interchangeable as a
whole, so each one's host vector must be lexicographically no cheaper than
the previous such slice's.
"""

import itertools
import logging
import math
import time
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from slicewise.constraints import (
    CAPACITY_TOLERANCE,
    Placement,
    chain_latency,
    cost_weight,
    is_feasible,
    placement_cost,
    vnf_cost,
)
from slicewise.env.types import Scenario, SliceRequest

from .solver import SolveResult

logger = logging.getLogger(__name__)

# Relative slack below the incumbent a bound must reach to keep a branch
PRUNE_TOLERANCE = 1e-9

# Nodes between wall-clock checks
_CLOCK_INTERVAL = 1024

Chain = Tuple[Optional[int], ...]
Kind = Tuple[float, float, Tuple[float, ...]]
KindCount = Tuple[float, float, Tuple[float, ...], int]


class SearchSpaceTooLargeError(ValueError):
    pass


class _Item:
    """One branching decision: a single VNF, or a whole consolidated slice"""

    def __init__(self, request: SliceRequest, request_pos: int, vnf_indices, scenario):
        self.request = request
        self.request_pos = request_pos
        self.vnf_indices = tuple(vnf_indices)
        self.chain_slots = tuple(
            request.user_plane.index(i)
            for i in self.vnf_indices
            if i in request.user_plane
        )
        vnfs = [request.vnfs[i] for i in self.vnf_indices]
        self.cpu = math.fsum(v.cpu_demand for v in vnfs)
        self.mem = math.fsum(v.mem_demand for v in vnfs)
        self.weight = math.fsum(cost_weight(v, scenario.cost_form) for v in vnfs)
        self.costs = [
            math.fsum(vnf_cost(v, infra.unit_cost, scenario.cost_form) for v in vnfs)
            for infra in scenario.infrastructures
        ]
        self.min_cost = min(self.costs)

    @property
    def kind(self) -> Kind:
        return (self.cpu, self.mem, tuple(self.costs))

    @property
    def interchangeable(self) -> bool:
        """A lone VNF off the user-plane chain only matters through its demands"""
        return len(self.vnf_indices) == 1 and not self.chain_slots


def _fill_bound(items: Sequence[Tuple[float, float]], capacities, unit_costs) -> float:
    """
    Cheapest fractional assignment of (weight, size) items to infrastructures
    with the given remaining sizes, at unit_cost * weight per whole item.

    Costs are rank one, so filling the cheapest infrastructure with the
    highest weight per unit of size first is optimal for the relaxation.
    items must already be sorted by descending weight / size.
    """
    order = sorted(range(len(capacities)), key=lambda m: (unit_costs[m], m))
    remaining = [max(0.0, capacities[m]) for m in order]
    total = 0.0
    tier = 0
    for (weight, size) in items:
        left = size
        while left > CAPACITY_TOLERANCE:
            if tier >= len(order):
                return math.inf
            take = min(left, remaining[tier])
            total += unit_costs[order[tier]] * weight * (take / size)
            remaining[tier] -= take
            left -= take
            if remaining[tier] <= CAPACITY_TOLERANCE:
                tier += 1
    return total


class BranchAndBound:
    def __init__(self, scenario: Scenario, time_limit: Optional[float] = None):
        self.scenario = scenario
        self.time_limit = time_limit
        self.n_infras = scenario.n_infrastructures
        self.cost_order = scenario.cost_order
        self.unit_costs = [float(c) for c in scenario.unit_costs]
        self._rank = [0] * self.n_infras
        for (r, m) in enumerate(self.cost_order):
            self._rank[m] = r

        self.requests = sorted(scenario.requests, key=lambda r: r.arrival_index)
        self.items: List[_Item] = []
        self.request_end: List[int] = []
        for (pos, request) in enumerate(self.requests):
            if request.consolidation_required:
                groups: Sequence[Sequence[int]] = [range(len(request.vnfs))]
            else:
                groups = [(i,) for i in range(len(request.vnfs))]
            for group in groups:
                self.items.append(_Item(request, pos, group, scenario))
            self.request_end.append(len(self.items))
        self.request_start = [0] + self.request_end[:-1]
        self._twin_request = self._previous_twins(
            range(len(self.requests)), lambda pos: self._signature(self.requests[pos])
        )
        self._twin_item = self._previous_twins(
            range(len(self.items)),
            lambda d: self.items[d].kind if self.items[d].interchangeable else None,
        )

        n_items = len(self.items)
        self._cpu_tails = [self._sorted_tail(d, "cpu") for d in range(n_items + 1)]
        self._mem_tails = [self._sorted_tail(d, "mem") for d in range(n_items + 1)]
        self._tail_kinds = self._kinds_by_depth()

        self._feasible_chains = [self._chains_under_budget(r) for r in self.requests]
        self._possible_cache: Dict[Tuple[int, Chain], bool] = {}
        self._rest_cache: Dict[Tuple[int, Chain], float] = {}

        # Cheapest latency-feasible cost of every request from pos onwards
        self._suffix_min = [0.0] * (len(self.requests) + 1)
        for pos in reversed(range(len(self.requests))):
            start = self.request_end[pos - 1] if pos else 0
            empty = (None,) * len(self.requests[pos].user_plane)
            self._suffix_min[pos] = self._suffix_min[pos + 1] + self._rest_min(
                start, empty
            )

        self.nodes = 0
        self.timed_out = False
        self.best_cost = math.inf
        self.best: Optional[List[int]] = None
        self.started = 0.0

    @staticmethod
    def _signature(request: SliceRequest):
        return (
            request.slice_type,
            request.vnfs,
            request.latency_budget_ms,
            request.consolidation_required,
        )

    @staticmethod
    def _previous_twins(indices, key) -> List[Optional[int]]:
        """For each index, the latest earlier index with the same non-None key"""
        last: Dict[object, int] = {}
        twins: List[Optional[int]] = []
        for i in indices:
            k = key(i)
            twins.append(None if k is None else last.get(k))
            if k is not None:
                last[k] = i
        return twins

    def _kinds_by_depth(self) -> List[List[KindCount]]:
        """Distinct (cpu, mem, costs) of the items from each depth on, with counts"""
        counts: Dict[Kind, int] = {}
        kinds: List[List[KindCount]] = [[]]
        for item in reversed(self.items):
            counts[item.kind] = counts.get(item.kind, 0) + 1
            kinds.append([(*k, n) for (k, n) in counts.items()])
        return kinds[::-1]

    def _sorted_tail(self, depth: int, resource: str) -> List[Tuple[float, float]]:
        tail = [(item.weight, getattr(item, resource)) for item in self.items[depth:]]
        return sorted(tail, key=lambda ws: -ws[0] / ws[1])

    def _chains_under_budget(self, request: SliceRequest) -> List[Tuple[int, ...]]:
        length = len(request.user_plane)
        candidates = itertools.product(range(self.n_infras), repeat=length)
        if request.consolidation_required:
            candidates = ((m,) * length for m in range(self.n_infras))  # type: ignore
        return [
            chain
            for chain in candidates
            if chain_latency(chain, self.scenario) < request.latency_budget_ms
        ]

    def _completions(self, request_pos: int, chain: Chain) -> Iterator[Tuple[int, ...]]:
        for candidate in self._feasible_chains[request_pos]:
            if all(m is None or m == c for (m, c) in zip(chain, candidate)):
                yield candidate

    def _chain_possible(self, request_pos: int, chain: Chain) -> bool:
        key = (request_pos, chain)
        if key not in self._possible_cache:
            self._possible_cache[key] = any(
                True for _ in self._completions(request_pos, chain)
            )
        return self._possible_cache[key]

    def _rest_min(self, depth: int, chain: Chain) -> float:
        """
        Cheapest completion, ignoring capacity, of the items from depth to
        the end of their request given the request's partial chain.
        """
        pos = self.items[depth].request_pos
        key = (depth, chain)
        if key in self._rest_cache:
            return self._rest_cache[key]
        rest = self.items[depth : self.request_end[pos]]
        best = math.inf
        for candidate in self._completions(pos, chain):
            total = 0.0
            for item in rest:
                if item.chain_slots:
                    total += item.costs[candidate[item.chain_slots[0]]]
                else:
                    total += item.min_cost
            best = min(best, total)
        self._rest_cache[key] = best
        return best

    def _latency_bound(self, depth: int, chain: Chain) -> float:
        if depth >= len(self.items):
            return 0.0
        pos = self.items[depth].request_pos
        if depth > 0 and self.items[depth - 1].request_pos == pos:
            return self._rest_min(depth, chain) + self._suffix_min[pos + 1]
        return self._suffix_min[pos]

    def _fit_bound(self, depth: int, cpu_left, mem_left) -> float:
        total = 0.0
        for (cpu, mem, costs, count) in self._tail_kinds[depth]:
            host = next(
                (
                    m
                    for m in self.cost_order
                    if cpu <= cpu_left[m] + CAPACITY_TOLERANCE
                    and mem <= mem_left[m] + CAPACITY_TOLERANCE
                ),
                None,
            )
            if host is None:
                return math.inf
            total += count * costs[host]
        return total

    def _lower_bound(self, depth: int, cpu_left, mem_left, chain: Chain) -> float:
        if depth >= len(self.items):
            return 0.0
        return max(
            _fill_bound(self._cpu_tails[depth], cpu_left, self.unit_costs),
            _fill_bound(self._mem_tails[depth], mem_left, self.unit_costs),
            self._fit_bound(depth, cpu_left, mem_left),
            self._latency_bound(depth, chain),
        )

    def _leaf_cost(self, choice: List[int]) -> float:
        terms = []
        for (item, m) in zip(self.items, choice):
            for i in item.vnf_indices:
                vnf = item.request.vnfs[i]
                terms.append(vnf_cost(vnf, self.unit_costs[m], self.scenario.cost_form))
        return math.fsum(terms)

    def _lowest_rank(self, depth: int, choice: List[int]) -> int:
        """Cheapest cost-order position left open to the item by symmetry breaking"""
        lowest = 0
        twin = self._twin_item[depth]
        if twin is not None:
            lowest = self._rank[choice[twin]]
        pos = self.items[depth].request_pos
        other = self._twin_request[pos]
        if other is not None:
            start = self.request_start[pos]
            mirror = self.request_start[other] + (depth - start)
            # Still tied with the earlier twin slice: stay no cheaper than it
            if choice[start:depth] == choice[self.request_start[other] : mirror]:
                lowest = max(lowest, self._rank[choice[mirror]])
        return lowest

    def _out_of_time(self) -> bool:
        if self.time_limit is None or self.nodes % _CLOCK_INTERVAL:
            return self.timed_out
        if time.perf_counter() - self.started > self.time_limit:
            self.timed_out = True
        return self.timed_out

    def search(self):
        self.started = time.perf_counter()
        cpu_left = [float(c) for c in self.scenario.cpu_capacity]
        mem_left = [float(c) for c in self.scenario.mem_capacity]
        chains = [[None] * len(r.user_plane) for r in self.requests]
        if self._suffix_min[0] < math.inf:
            self._branch(0, 0.0, cpu_left, mem_left, [], chains)

    def _branch(self, depth, partial, cpu_left, mem_left, choice, chains):
        if depth == len(self.items):
            cost = self._leaf_cost(choice)
            if cost < self.best_cost:
                self.best_cost = cost
                self.best = list(choice)
            return

        item = self.items[depth]
        chain = chains[item.request_pos]
        for m in self.cost_order[self._lowest_rank(depth, choice) :]:
            if self._out_of_time():
                return
            self.nodes += 1
            if (
                cpu_left[m] + CAPACITY_TOLERANCE < item.cpu
                or mem_left[m] + CAPACITY_TOLERANCE < item.mem
            ):
                continue
            for slot in item.chain_slots:
                chain[slot] = m
            partial_chain = tuple(chain)
            if not item.chain_slots or self._chain_possible(
                item.request_pos, partial_chain
            ):
                cpu_left[m] -= item.cpu
                mem_left[m] -= item.mem
                child = partial + item.costs[m]
                bound = child + self._lower_bound(
                    depth + 1, cpu_left, mem_left, partial_chain
                )
                if bound < self.best_cost * (1 - PRUNE_TOLERANCE):
                    choice.append(m)
                    self._branch(depth + 1, child, cpu_left, mem_left, choice, chains)
                    choice.pop()
                cpu_left[m] += item.cpu
                mem_left[m] += item.mem
            for slot in item.chain_slots:
                chain[slot] = None

    def placement(self) -> Optional[Placement]:
        if self.best is None:
            return None
        placement = Placement()
        for (item, m) in zip(self.items, self.best):
            for i in item.vnf_indices:
                placement.assign(item.request.id, i, m)
        return placement


def solve_exact(scenario: Scenario, time_limit: Optional[float] = None) -> SolveResult:
    """
    Minimum-cost feasible placement of every slice in the scenario.

    Among placements of equal cost the one found first wins: branches are
    ordered by ascending unit cost, then infrastructure index. Of
    interchangeable VNFs, and of identical slices, the earlier one in
    arrival order takes the cheaper host.

    :param scenario: slices and infrastructures
    :param time_limit: wall-clock cap in seconds; when hit, the incumbent is
        returned with optimal=False
    :return: a SolveResult whose placement is None if no feasible placement
        exists (or none was found in time)
    """
    search = BranchAndBound(scenario, time_limit)
    search.search()
    wall_time = time.perf_counter() - search.started

    placement = search.placement()
    optimal = not search.timed_out
    if placement is None:
        logger.info(
            "exact: no feasible placement (%d nodes, %.3fs, complete search: %s)",
            search.nodes,
            wall_time,
            optimal,
        )
        return SolveResult(
            placement=None,
            cost=math.inf,
            nodes_explored=search.nodes,
            wall_time=wall_time,
            optimal=optimal,
            algorithm="exact",
        )

    cost = placement_cost(placement, scenario)
    logger.info(
        "exact: cost %.6g $/h, %d nodes, %.3fs%s",
        cost,
        search.nodes,
        wall_time,
        "" if optimal else " (time limit hit)",
    )
    return SolveResult(
        placement=placement,
        cost=cost,
        nodes_explored=search.nodes,
        wall_time=wall_time,
        optimal=optimal,
        algorithm="exact",
    )


def search_space_size(scenario: Scenario) -> int:
    n_vnfs = sum(len(r.vnfs) for r in scenario.requests)
    return scenario.n_infrastructures ** n_vnfs


def plain_enumeration_nodes(scenario: Scenario) -> int:
    """Nodes of the full per-VNF assignment tree, root excluded"""
    n_vnfs = sum(len(r.vnfs) for r in scenario.requests)
    m = scenario.n_infrastructures
    return sum(m ** depth for depth in range(1, n_vnfs + 1))


def iter_placements(
    scenario: Scenario, limit: int
) -> Iterator[Tuple[Placement, float, bool]]:
    """
    Lazily yield every complete placement with its cost and feasibility, in
    lexicographic order of infrastructure indices.

    :raises SearchSpaceTooLargeError: if there are more than limit placements
    """
    size = search_space_size(scenario)
    if size > limit:
        raise SearchSpaceTooLargeError(
            f"{size} placements exceed the enumeration limit of {limit}"
        )
    keys = [(r.id, i) for r in scenario.requests for i in range(len(r.vnfs))]
    for choice in itertools.product(range(scenario.n_infrastructures), repeat=len(keys)):
        placement = Placement(dict(zip(keys, choice)))
        feasible = is_feasible(placement, scenario).feasible
        yield placement, placement_cost(placement, scenario), feasible


def enumerate_all(
    scenario: Scenario, limit: int
) -> List[Tuple[Placement, float, bool]]:
    """Every complete placement as (placement, cost, feasible)"""
    return list(iter_placements(scenario, limit))


def best_enumerated(
    entries: Sequence[Tuple[Placement, float, bool]]
) -> Optional[Tuple[Placement, float, bool]]:
    """Cheapest feasible entry, None when nothing is feasible"""
    feasible = [entry for entry in entries if entry[2]]
    if not feasible:
        return None
    return min(feasible, key=lambda entry: entry[1])
