import math

import numpy as onp
import pytest

from slicewise.constraints import check_capacity, is_feasible
from slicewise.env import Infrastructure, Tier, generate_scenario
from slicewise.solvers import (
    balance_scores,
    check_result,
    performance_order,
    place_cost_aware,
    place_load_balance,
    place_performance_aware,
    place_random,
)
from tests.conftest import EMBB, SLICE_COST_WEIGHT, SLICE_CPU, scenario_of

TINY = (
    Infrastructure(0, Tier.edge, 1.0, 1.0, 0.010, 5.0),
    Infrastructure(1, Tier.distributed, 1.0, 1.0, 0.005, 7.5),
    Infrastructure(2, Tier.central, 2.0, 2.0, 0.001, 10.0),
)


def hosts_of(result, scenario):
    return [result.placement.for_request(r) for r in scenario.requests]


def test_cost_aware_fills_central_first(one_of_each):
    result = place_cost_aware(one_of_each)
    assert result.algorithm == "cost"
    assert all(set(hosts) == {2} for hosts in hosts_of(result, one_of_each))
    assert result.cost == pytest.approx(3 * SLICE_COST_WEIGHT * 0.001)


def test_heuristics_ignore_latency(one_of_each):
    report = is_feasible(place_cost_aware(one_of_each).placement, one_of_each)
    assert report.capacity_ok
    # URLLC at central misses its budget
    assert not report.latency_ok


def test_performance_aware_fills_edge_first():
    scenario = scenario_of([EMBB] * 5)
    result = place_performance_aware(scenario)
    assert result.algorithm == "perf"
    hosts = hosts_of(result, scenario)
    assert all(set(h) == {0} for h in hosts[:3])
    assert set(hosts[3]) == {1}
    cpu, _ = result.placement.used_resources(scenario)
    assert cpu[0] == pytest.approx(3 * SLICE_CPU)
    assert cpu[2] == 0.0


def test_performance_order(single_embb):
    assert performance_order(single_embb) == [0, 1, 2]


@pytest.mark.parametrize("n", [5, 10, 15])
def test_cost_aware_never_dearer_than_performance_aware(n):
    for seed in range(5):
        scenario = generate_scenario(n, seed)
        cost = place_cost_aware(scenario)
        perf = place_performance_aware(scenario)
        assert cost.placed and perf.placed
        assert cost.cost <= perf.cost


def test_random_is_reproducible():
    scenario = generate_scenario(10, 4)
    a = place_random(scenario, onp.random.default_rng(8))
    b = place_random(scenario, onp.random.default_rng(8))
    assert a.placement == b.placement
    assert a.cost == b.cost
    c = place_random(scenario, onp.random.default_rng(9))
    assert c.placement != a.placement


def test_random_is_uniform_when_everything_fits():
    roomy = (
        Infrastructure(0, Tier.edge, 1e4, 1e4, 0.010, 5.0),
        Infrastructure(1, Tier.distributed, 1e4, 1e4, 0.005, 7.5),
        Infrastructure(2, Tier.central, 1e4, 1e4, 0.001, 10.0),
    )
    scenario = scenario_of([EMBB] * 30, infrastructures=roomy)
    counts = onp.zeros(3)
    for seed in range(50):
        result = place_random(scenario, onp.random.default_rng(seed))
        for (_, m) in result.placement.items():
            counts[m] += 1
    shares = counts / counts.sum()
    assert counts.sum() == 50 * 30 * 7
    onp.testing.assert_allclose(shares, [1 / 3] * 3, atol=0.02)


def peak_utilization(result, scenario):
    cpu, mem = result.placement.used_resources(scenario)
    return max(
        onp.max(cpu / onp.array(scenario.cpu_capacity)),
        onp.max(mem / onp.array(scenario.mem_capacity)),
    )


def test_load_balance_prefers_emptiest(single_embb):
    result = place_load_balance(single_embb)
    assert result.algorithm == "balance"
    # The NRF is relatively smallest on the central tier
    assert hosts_of(result, single_embb)[0][0] == 2


def test_load_balance_flattens_peak():
    scenario = generate_scenario(15, 2)
    balanced = peak_utilization(place_load_balance(scenario), scenario)
    packed = peak_utilization(place_cost_aware(scenario), scenario)
    assert balanced < packed


def test_balance_scores(single_embb):
    du = single_embb.requests[0].vnfs[6]
    scores = balance_scores(du, onp.zeros(3), onp.zeros(3), single_embb)
    onp.testing.assert_allclose(scores, [3.0 / 16, 3.0 / 32, 3.0 / 64])
    # Dominant resource wins
    scores = balance_scores(du, onp.zeros(3), onp.array([15.0, 0.0, 0.0]), single_embb)
    assert scores[0] == pytest.approx(17.0 / 16)


@pytest.mark.parametrize(
    "place",
    [
        place_cost_aware,
        place_performance_aware,
        place_load_balance,
        lambda s: place_random(s, onp.random.default_rng(0)),
    ],
)
def test_never_overcommits(place):
    for seed in range(10):
        scenario = generate_scenario(15, seed)
        result = place(scenario)
        assert result.placed
        assert check_capacity(result.placement, scenario)
        assert result.cost == pytest.approx(
            sum(
                v.cpu_demand * v.mem_demand * scenario.unit_costs[m]
                for r in scenario.requests
                for (v, m) in zip(r.vnfs, result.placement.for_request(r))
            )
        )


@pytest.mark.parametrize(
    "place",
    [
        place_cost_aware,
        place_performance_aware,
        place_load_balance,
        lambda s: place_random(s, onp.random.default_rng(0)),
    ],
)
def test_vnf_that_fits_nowhere(place):
    # The DU needs three cores
    scenario = scenario_of([EMBB], infrastructures=TINY)
    result = place(scenario)
    assert result.placement is None
    assert math.isinf(result.cost)
    assert check_result(result, scenario)
    assert result.wall_time >= 0.0
