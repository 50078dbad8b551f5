from dataclasses import replace
import itertools
import math

import numpy as onp
import pytest

from slicewise.constraints import Placement, is_feasible, placement_cost
from slicewise.env import (
    Infrastructure,
    LatencyModel,
    SliceType,
    Tier,
    generate_scenario,
)
from slicewise.solvers import (
    BranchAndBound,
    SearchSpaceTooLargeError,
    best_enumerated,
    check_result,
    enumerate_all,
    iter_placements,
    plain_enumeration_nodes,
    search_space_size,
    solve_exact,
)
from tests.conftest import EMBB, MMTC, SLICE_COST_WEIGHT, URLLC, scenario_of

HOPS = onp.array([[0.0, 0.5, 20.5], [0.5, 0.0, 20.0], [20.5, 20.0, 0.0]])
DN = onp.array([5.0, 7.5, 10.0])

# Central tier too small for two slices
TIGHT = (
    Infrastructure(0, Tier.edge, 16.0, 16.0, 0.010, 5.0),
    Infrastructure(1, Tier.distributed, 8.0, 8.0, 0.005, 7.5),
    Infrastructure(2, Tier.central, 6.0, 6.0, 0.001, 10.0),
)


def slice_options(request, scenario):
    """
    Every placement of one slice as numpy arrays: per-tier cpu and mem use,
    cost, and whether latency and consolidation hold.
    """
    hosts = onp.array(list(itertools.product(range(3), repeat=len(request.vnfs))))
    tiers = onp.arange(3)
    unit = onp.array(scenario.unit_costs)
    cpu = onp.zeros((len(hosts), 3))
    mem = onp.zeros((len(hosts), 3))
    cost = onp.zeros(len(hosts))
    for (i, vnf) in enumerate(request.vnfs):
        on = hosts[:, i, None] == tiers
        cpu += vnf.cpu_demand * on
        mem += vnf.mem_demand * on
        cost += vnf.cpu_demand * vnf.mem_demand * unit[hosts[:, i]]
    names = [v.name for v in request.vnfs]
    du = hosts[:, names.index("DU")]
    cu = hosts[:, names.index("CU")]
    upf = hosts[:, names.index("UPF")]
    latency = HOPS[du, cu] + HOPS[cu, upf] + DN[upf]
    ok = latency < request.latency_budget_ms
    if request.consolidation_required:
        ok &= (hosts == hosts[:, :1]).all(axis=1)
    return hosts[ok], cpu[ok], mem[ok], cost[ok]


def brute_force_pair(scenario):
    """Cheapest feasible placement of a two-slice scenario, None if none"""
    a, b = (slice_options(r, scenario) for r in scenario.requests)
    cpu = a[1][:, None, :] + b[1][None, :, :]
    mem = a[2][:, None, :] + b[2][None, :, :]
    fits = (cpu <= onp.array(scenario.cpu_capacity) + 1e-9).all(axis=2) & (
        mem <= onp.array(scenario.mem_capacity) + 1e-9
    ).all(axis=2)
    if not fits.any():
        return None
    cost = onp.where(fits, a[3][:, None] + b[3][None, :], onp.inf)
    (i, j) = onp.unravel_index(onp.argmin(cost), cost.shape)
    placement = Placement()
    for (request, hosts) in zip(scenario.requests, (a[0][i], b[0][j])):
        for (k, m) in enumerate(hosts):
            placement.assign(request.id, k, int(m))
    return placement


def brute_force_cost(scenario):
    placement = brute_force_pair(scenario)
    return math.inf if placement is None else placement_cost(placement, scenario)


def permuted(scenario, order):
    """The same scenario with infrastructure k taken from position order[k]"""
    infrastructures = tuple(
        replace(scenario.infrastructures[old], id=new) for (new, old) in enumerate(order)
    )
    links = {
        (k, n): scenario.latency_model.link(order[k], order[n])
        for k in range(len(order))
        for n in range(len(order))
    }
    return replace(
        scenario,
        infrastructures=infrastructures,
        latency_model=LatencyModel.from_links(len(order), links),
    )


def scaled(scenario, factor):
    infrastructures = tuple(
        replace(
            infra,
            cpu_capacity=infra.cpu_capacity * factor,
            mem_capacity=infra.mem_capacity * factor,
        )
        for infra in scenario.infrastructures
    )
    return replace(scenario, infrastructures=infrastructures)


@pytest.mark.parametrize(
    "slice_type,expected",
    [
        (EMBB, 0.0072416),
        (MMTC, 0.0072416),
        (URLLC, 0.0007296 + 0.03256),
    ],
)
def test_single_slice_golden_cost(slice_type, expected):
    scenario = scenario_of([slice_type])
    result = solve_exact(scenario)
    assert result.optimal
    assert result.cost == pytest.approx(expected, rel=1e-12)
    assert check_result(result, scenario)


def test_embb_goes_all_central(single_embb):
    result = solve_exact(single_embb)
    assert set(result.placement.for_request(single_embb.requests[0])) == {2}
    assert result.cost == pytest.approx(SLICE_COST_WEIGHT * 0.001)


def test_urllc_user_plane_on_distributed(single_urllc):
    result = solve_exact(single_urllc)
    hosts = result.placement.for_request(single_urllc.requests[0])
    # Control plane first, then UPF, CU, DU
    assert hosts == (2, 2, 2, 2, 1, 1, 1)


@pytest.mark.parametrize("slice_type", list(SliceType))
def test_matches_enumeration_for_one_slice(slice_type):
    for seed in range(3):
        scenario = scenario_of([slice_type], seed=seed)
        entries = enumerate_all(scenario, limit=3 ** 7)
        assert len(entries) == 3 ** 7
        (_, best_cost, _) = best_enumerated(entries)
        assert solve_exact(scenario).cost == best_cost


@pytest.mark.parametrize("seed", range(50))
def test_matches_enumeration_on_random_scenarios(seed):
    scenario = generate_scenario(1 + seed % 2, seed)
    if len(scenario.requests) == 1:
        (_, expected, _) = best_enumerated(enumerate_all(scenario, limit=3 ** 7))
    else:
        expected = brute_force_cost(scenario)
    result = solve_exact(scenario)
    assert result.optimal
    assert result.cost == expected
    assert check_result(result, scenario)


@pytest.mark.parametrize(
    "types", [[EMBB, EMBB], [URLLC, EMBB], [MMTC, URLLC], [MMTC, MMTC], [URLLC, URLLC]]
)
def test_matches_brute_force_under_tight_capacity(types):
    scenario = scenario_of(types, infrastructures=TIGHT)
    expected = brute_force_cost(scenario)
    result = solve_exact(scenario)
    if math.isinf(expected):
        assert result.placement is None
        assert result.cost == math.inf
    else:
        assert result.cost == pytest.approx(expected, rel=1e-9)
        assert is_feasible(result.placement, scenario)
        cpu, _ = result.placement.used_resources(scenario)
        assert cpu[2] <= 6.0 + 1e-9


def test_infeasible_scenario_returns_no_placement():
    small = (
        Infrastructure(0, Tier.edge, 1.0, 1.0, 0.010, 5.0),
        Infrastructure(1, Tier.distributed, 1.0, 1.0, 0.005, 7.5),
        Infrastructure(2, Tier.central, 64.0, 64.0, 0.001, 10.0),
    )
    # URLLC cannot host its DU centrally and nothing else has room for it
    scenario = scenario_of([URLLC], infrastructures=small)
    result = solve_exact(scenario)
    assert result.placement is None
    assert result.cost == math.inf
    assert result.optimal
    assert not result.placed
    assert check_result(result, scenario)


def test_empty_scenario():
    scenario = generate_scenario(0, 0)
    result = solve_exact(scenario)
    assert result.placement == Placement()
    assert result.cost == 0.0


def test_equal_costs_break_ties_by_index():
    twins = (
        Infrastructure(0, Tier.edge, 16.0, 16.0, 0.010, 5.0),
        Infrastructure(1, Tier.distributed, 64.0, 64.0, 0.001, 10.0),
        Infrastructure(2, Tier.central, 64.0, 64.0, 0.001, 10.0),
    )
    scenario = scenario_of([EMBB], infrastructures=twins)
    result = solve_exact(scenario)
    assert set(result.placement.for_request(scenario.requests[0])) == {1}


def test_pruning_beats_plain_enumeration():
    scenario = generate_scenario(3, 1)
    result = solve_exact(scenario)
    assert 0 < result.nodes_explored < plain_enumeration_nodes(scenario)


def test_time_limit_flags_non_optimal():
    scenario = generate_scenario(5, 0)
    result = solve_exact(scenario, time_limit=0.0)
    assert not result.optimal
    assert result.algorithm == "exact"


def test_cost_is_recomputed_from_placement():
    scenario = generate_scenario(4, 9)
    result = solve_exact(scenario)
    assert result.cost == placement_cost(result.placement, scenario)


def test_cost_never_rises_with_capacity():
    base = generate_scenario(2, 5)
    costs = [solve_exact(scaled(base, f)).cost for f in (0.15, 0.25, 0.5, 1.0, 2.0)]
    assert all(later <= earlier for (earlier, later) in zip(costs, costs[1:]))
    assert costs[-1] == costs[-2]


@pytest.mark.parametrize("order", [(2, 1, 0), (1, 2, 0), (0, 2, 1)])
def test_infrastructure_order_does_not_matter(order):
    for seed in (0, 3):
        scenario = scaled(generate_scenario(3, seed), 0.25)
        expected = solve_exact(scenario)
        result = solve_exact(permuted(scenario, order))
        assert result.optimal
        assert result.cost == pytest.approx(expected.cost, rel=1e-12)


class TestSymmetryBreaking:
    def test_twin_slices_are_ordered(self):
        scenario = scenario_of([EMBB, EMBB], infrastructures=TIGHT)
        search = BranchAndBound(scenario)
        search.search()
        placement = search.placement()
        rank = {m: r for (r, m) in enumerate(scenario.cost_order)}
        first, second = (
            [rank[m] for m in placement.for_request(r)] for r in scenario.requests
        )
        assert first <= second
        assert placement_cost(placement, scenario) == pytest.approx(
            brute_force_cost(scenario), rel=1e-12
        )

    def test_interchangeable_vnfs_are_ordered(self):
        scenario = scenario_of([EMBB, URLLC], infrastructures=TIGHT)
        result = solve_exact(scenario)
        rank = {m: r for (r, m) in enumerate(scenario.cost_order)}
        names = [v.name for v in scenario.requests[0].vnfs]
        for request in scenario.requests:
            hosts = result.placement.for_request(request)
            assert rank[hosts[names.index("AMF")]] <= rank[hosts[names.index("SMF")]]

    def test_same_optimum_as_the_full_tree(self, monkeypatch):
        scenarios = [
            scenario_of([EMBB, EMBB, URLLC], infrastructures=TIGHT),
            scenario_of([MMTC, MMTC, EMBB], infrastructures=TIGHT),
        ]
        pruned = [solve_exact(s) for s in scenarios]
        monkeypatch.setattr(BranchAndBound, "_lowest_rank", lambda self, depth, choice: 0)
        full = [solve_exact(s) for s in scenarios]
        for (a, b) in zip(pruned, full):
            assert a.cost == pytest.approx(b.cost, rel=1e-12)
        assert sum(a.nodes_explored for a in pruned) < sum(b.nodes_explored for b in full)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_fifteen_slices_solve_to_optimality(seed):
    scenario = generate_scenario(15, seed)
    result = solve_exact(scenario, time_limit=60.0)
    assert result.optimal
    assert check_result(result, scenario)


class TestEnumeration:
    def test_search_space_size(self, one_of_each):
        assert search_space_size(one_of_each) == 3 ** 21
        assert plain_enumeration_nodes(scenario_of([EMBB])) == sum(
            3 ** d for d in range(1, 8)
        )

    def test_limit(self):
        scenario = generate_scenario(5, 0)
        with pytest.raises(SearchSpaceTooLargeError):
            enumerate_all(scenario, limit=1000)
        with pytest.raises(ValueError):
            next(iter_placements(scenario, limit=1000))

    def test_lexicographic_order(self, single_embb):
        (first, first_cost, feasible) = next(iter_placements(single_embb, 3 ** 7))
        assert set(first.for_request(single_embb.requests[0])) == {0}
        assert first_cost == pytest.approx(SLICE_COST_WEIGHT * 0.010)
        assert feasible

    def test_nothing_feasible(self):
        assert best_enumerated([(Placement(), 1.0, False)]) is None
