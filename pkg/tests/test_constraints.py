import math

import numpy as onp
import pytest

from slicewise.constraints import (
    ALL_CONSTRAINTS,
    Capacity,
    Consolidation,
    Latency,
    Placement,
    chain_latency,
    check_capacity,
    check_consolidation,
    check_latency,
    cost_weight,
    is_feasible,
    partial_cost,
    placement_cost,
    user_plane_latency,
)
from slicewise.env import ScenarioConfig, SliceType, generate_scenario
from tests.conftest import EMBB, MMTC, SLICE_COST_WEIGHT, SLICE_CPU, scenario_of

# Independent copy of the default infrastructure parameters
CPU_CAPACITY = [16.0, 32.0, 64.0]
MEM_CAPACITY = [16.0, 32.0, 64.0]
DN_LATENCY = [5.0, 7.5, 10.0]
HOP_MEAN = {
    (0, 1): 0.5,
    (1, 2): 20.0,
    (0, 2): 20.5,
}


def hop(m, m_next):
    if m == m_next:
        return 0.0
    return HOP_MEAN[(min(m, m_next), max(m, m_next))]


def all_on(scenario, m):
    placement = Placement()
    for request in scenario.requests:
        for i in range(len(request.vnfs)):
            placement.assign(request.id, i, m)
    return placement


def brute_force_checks(assignment, scenario):
    """
    Per-constraint verdicts computed straight from the catalog numbers.

    assignment maps (slice id, vnf name) to an infrastructure index.
    """
    cpu = [0.0, 0.0, 0.0]
    mem = [0.0, 0.0, 0.0]
    latency_ok = consolidation_ok = True
    for request in scenario.requests:
        hosts = {}
        for vnf in request.vnfs:
            m = assignment[(request.id, vnf.name)]
            hosts[vnf.name] = m
            cpu[m] += vnf.cpu_demand
            mem[m] += vnf.mem_demand
        du, cu, upf = hosts["DU"], hosts["CU"], hosts["UPF"]
        latency = hop(du, cu) + hop(cu, upf) + DN_LATENCY[upf]
        if not latency < request.latency_budget_ms:
            latency_ok = False
        if request.slice_type is SliceType.mMTC and len(set(hosts.values())) > 1:
            consolidation_ok = False
    capacity_ok = all(
        cpu[m] <= CPU_CAPACITY[m] + 1e-9 and mem[m] <= MEM_CAPACITY[m] + 1e-9
        for m in range(3)
    )
    return capacity_ok, latency_ok, consolidation_ok


def test_constraint_identity():
    assert Capacity() == Capacity()
    assert hash(Latency()) == hash(Latency())
    assert Capacity() != Consolidation()
    assert [c.id for c in ALL_CONSTRAINTS] == [
        "complete",
        "capacity",
        "latency",
        "consolidation",
    ]


class TestPlacement:
    def test_assign_and_lookup(self, one_of_each):
        placement = all_on(one_of_each, 2)
        assert len(placement) == 21
        assert placement.get("s0", 3) == 2
        assert placement.get("s9", 0) is None
        assert placement.slice_ids() == ("s0", "s1", "s2")
        with pytest.raises(ValueError):
            placement.assign("s0", 0, -1)

    def test_merge(self):
        a = Placement({("s0", 0): 1})
        b = Placement({("s1", 0): 2})
        assert a.merge(b) == Placement({("s0", 0): 1, ("s1", 0): 2})
        with pytest.raises(ValueError):
            a.merge(Placement({("s0", 0): 2}))

    def test_drop_and_restrict(self, one_of_each):
        placement = all_on(one_of_each, 1)
        assert placement.restricted_to(["s1"]).slice_ids() == ("s1",)
        placement.drop_slice("s1")
        assert placement.slice_ids() == ("s0", "s2")

    def test_used_resources(self, one_of_each):
        cpu, mem = all_on(one_of_each, 1).used_resources(one_of_each)
        assert cpu[1] == pytest.approx(3 * SLICE_CPU)
        assert cpu[0] == cpu[2] == 0.0
        assert mem[1] == pytest.approx(3 * 4.56)

    def test_frame_roundtrip(self, one_of_each):
        placement = all_on(one_of_each, 2)
        placement.assign("s0", 6, 0)
        frame = placement.to_frame(one_of_each)
        assert list(frame.columns) == ["slice_id", "vnf", "infra", "tier"]
        assert len(frame) == 21
        du = frame[(frame.slice_id == "s0") & (frame.vnf == "DU")]
        assert du.tier.tolist() == ["edge"]
        assert Placement.from_frame(frame, one_of_each) == placement


class TestObjective:
    def test_one_slice_at_central(self, single_embb):
        cost = placement_cost(all_on(single_embb, 2), single_embb)
        assert cost == pytest.approx(SLICE_COST_WEIGHT * 0.001)

    def test_one_slice_at_edge(self, single_embb):
        cost = placement_cost(all_on(single_embb, 0), single_embb)
        assert cost == pytest.approx(SLICE_COST_WEIGHT * 0.010)

    def test_weighted_sum_form(self):
        scenario = scenario_of([EMBB], ScenarioConfig(cost_form="weighted_sum"))
        cost = placement_cost(all_on(scenario, 2), scenario)
        assert cost == pytest.approx((5.3 + 4.56) * 0.001)

    def test_cost_weight(self, single_embb):
        du = single_embb.requests[0].vnfs[6]
        assert cost_weight(du) == 6.0
        assert cost_weight(du, "weighted_sum") == 5.0
        with pytest.raises(NotImplementedError):
            cost_weight(du, "max")  # type: ignore

    def test_incomplete_placement(self, single_embb):
        partial = Placement({("s0", 0): 2})
        with pytest.raises(ValueError):
            placement_cost(partial, single_embb)
        assert partial_cost(partial, single_embb) == pytest.approx(0.15 * 0.128 * 0.001)

    def test_cost_adds_up_over_slices(self, one_of_each):
        rng = onp.random.default_rng(2)
        keys = [(r.id, i) for r in one_of_each.requests for i in range(len(r.vnfs))]
        hosts = rng.integers(0, 3, size=len(keys)).tolist()
        placement = Placement(dict(zip(keys, hosts)))
        per_slice = [
            placement_cost(placement.restricted_to([r.id]), one_of_each.subset([r.id]))
            for r in one_of_each.requests
        ]
        assert placement_cost(placement, one_of_each) == pytest.approx(
            math.fsum(per_slice), rel=1e-15
        )

    @pytest.mark.parametrize("vnf_index,src,dst", [(6, 2, 0), (0, 2, 1), (4, 1, 0)])
    def test_moving_one_vnf(self, single_embb, vnf_index, src, dst):
        unit = [0.010, 0.005, 0.001]
        vnf = single_embb.requests[0].vnfs[vnf_index]
        before = all_on(single_embb, 2).assign("s0", vnf_index, src)
        after = all_on(single_embb, 2).assign("s0", vnf_index, dst)
        delta = placement_cost(after, single_embb) - placement_cost(before, single_embb)
        expected = (unit[dst] - unit[src]) * vnf.cpu_demand * vnf.mem_demand
        assert delta == pytest.approx(expected, rel=1e-12, abs=1e-15)

    def test_cost_does_not_depend_on_insertion_order(self, one_of_each):
        rng = onp.random.default_rng(0)
        keys = [(r.id, i) for r in one_of_each.requests for i in range(len(r.vnfs))]
        hosts = rng.integers(0, 3, size=len(keys))
        forward = Placement(dict(zip(keys, hosts)))
        backward = Placement(dict(zip(reversed(keys), reversed(hosts))))
        assert placement_cost(forward, one_of_each) == placement_cost(
            backward, one_of_each
        )


class TestLatency:
    def test_urllc_budget_is_strict(self, single_urllc):
        request = single_urllc.requests[0]
        central = all_on(single_urllc, 2)
        assert user_plane_latency(central, request, single_urllc) == 10.0
        assert not check_latency(central, request, single_urllc)
        assert check_latency(all_on(single_urllc, 1), request, single_urllc)

    def test_chain_latency(self, single_embb):
        assert chain_latency([], single_embb) == 0.0
        assert chain_latency([0, 1, 1], single_embb) == 0.5 + 7.5
        assert chain_latency([0, 1, 2], single_embb) == 0.5 + 20.0 + 10.0
        with pytest.raises(ValueError):
            chain_latency([0, 1], single_embb, "sampled")

    def test_sampled_latency_is_reproducible(self, single_embb):
        request = single_embb.requests[0]
        placement = all_on(single_embb, 1)
        placement.assign("s0", 6, 0)
        first = user_plane_latency(
            placement, request, single_embb, "sampled", onp.random.default_rng(3)
        )
        second = user_plane_latency(
            placement, request, single_embb, "sampled", onp.random.default_rng(3)
        )
        assert first == second
        assert first != 8.0

    def test_sampled_mean_matches_model(self, single_embb):
        request = single_embb.requests[0]
        placement = all_on(single_embb, 2)
        placement.assign("s0", 5, 1)
        placement.assign("s0", 6, 0)
        rng = onp.random.default_rng(21)
        n = 4000
        samples = onp.array(
            [
                user_plane_latency(placement, request, single_embb, "sampled", rng)
                for _ in range(n)
            ]
        )
        assert user_plane_latency(placement, request, single_embb) == 0.5 + 20.0 + 10.0
        stderr = math.sqrt(0.1 ** 2 + 1.0 ** 2) / math.sqrt(n)
        assert abs(samples.mean() - 30.5) < 3 * stderr
        assert samples.std() == pytest.approx(math.sqrt(1.01), rel=0.05)

    def test_unassigned_user_plane(self, single_embb):
        with pytest.raises(ValueError):
            user_plane_latency(Placement(), single_embb.requests[0], single_embb)
        placement = Placement({("s0", i): 2 for i in range(7)})
        placement.unassign("s0", 6)
        with pytest.raises(ValueError):
            user_plane_latency(placement, single_embb.requests[0], single_embb)
        assert Latency().holds(Placement(), single_embb)


def test_consolidation(single_mmtc):
    request = single_mmtc.requests[0]
    assert check_consolidation(all_on(single_mmtc, 2), request)
    split = all_on(single_mmtc, 2).assign("s0", 0, 1)
    assert not check_consolidation(split, request)
    assert Consolidation().violations(split, single_mmtc) == [("consolidation", "s0")]


def test_capacity_violation_on_edge():
    scenario = scenario_of([EMBB] * 4)
    placement = all_on(scenario, 0)
    assert not check_capacity(placement, scenario)
    assert Capacity().violations(placement, scenario) == [("capacity", 0)]
    assert check_capacity(all_on(scenario, 2), scenario)
    with pytest.raises(ValueError):
        check_capacity(Placement(), scenario)


def test_feasibility_report(one_of_each):
    report = is_feasible(all_on(one_of_each, 2), one_of_each)
    # URLLC at central misses its 10 ms budget
    assert not report
    assert report.complete and report.capacity_ok and report.consolidation_ok
    assert report.violations_of("latency") == [("latency", "s0")]
    assert report.to_dict()["violated"] == "latency:s0"

    partial = is_feasible(Placement({("s1", 0): 2}), one_of_each)
    assert not partial.complete
    assert partial.capacity_ok


def test_feasible_one_of_each(one_of_each):
    placement = all_on(one_of_each, 2)
    for i in range(7):
        placement.assign("s0", i, 1)
    assert is_feasible(placement, one_of_each).feasible


def test_checker_matches_brute_force():
    rng = onp.random.default_rng(2024)
    checked = 0
    for seed in range(20):
        scenario = generate_scenario(5, seed)
        keys = [(r.id, i) for r in scenario.requests for i in range(len(r.vnfs))]
        names = {
            (r.id, i): (r.id, v.name)
            for r in scenario.requests
            for (i, v) in enumerate(r.vnfs)
        }
        for _ in range(500):
            weights = rng.dirichlet([0.5, 0.5, 0.5])
            hosts = rng.choice(3, size=len(keys), p=weights)
            placement = Placement(dict(zip(keys, hosts)))
            report = is_feasible(placement, scenario)
            expected = brute_force_checks(
                {names[k]: int(m) for (k, m) in zip(keys, hosts)}, scenario
            )
            assert (report.capacity_ok, report.latency_ok, report.consolidation_ok) == (
                expected
            )
            assert report.complete
            assert report.feasible == all(expected)
            checked += 1
    assert checked == 10000


def test_brute_force_flags_overloaded_edge():
    scenario = scenario_of([EMBB, MMTC, EMBB, EMBB, EMBB])
    edge = all_on(scenario, 0)
    names = {(r.id, v.name): 0 for r in scenario.requests for v in r.vnfs}
    assert brute_force_checks(names, scenario) == (False, True, True)
    assert not check_capacity(edge, scenario)
    assert math.isclose(partial_cost(edge, scenario), 5 * SLICE_COST_WEIGHT * 0.01)
