import json
import math

import pandas as pd
import pytest

from slicewise.constraints import Placement
from slicewise.env import Infrastructure, ScenarioConfig, Tier, generate_scenario
from slicewise.experiments import (
    ALGORITHMS,
    THREADS_ENV,
    ExperimentSpec,
    emit_report,
    latency_rng,
    measure,
    rows_to_frame,
    run_experiment,
    scenario_seed,
    speedup_table,
    summary_table,
)
from slicewise.rl import MissingCheckpointError
from slicewise.solvers import SolveResult, finish_result
from tests.conftest import EMBB, SLICE_CPU, URLLC, scenario_of, untrained_bundle

BASELINES = ("exact", "cost", "perf", "random", "balance")


@pytest.fixture(scope="module")
def small_spec():
    return ExperimentSpec(slice_counts=(2, 3), trials=3, algorithms=BASELINES, threads=1)


@pytest.fixture(scope="module")
def small_rows(small_spec):
    return run_experiment(small_spec, progress=False)


def all_central(scenario):
    placement = Placement()
    for request in scenario.requests:
        for i in range(len(request.vnfs)):
            placement.assign(request.id, i, 2)
    return placement


class TestSpec:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        spec = ExperimentSpec()
        assert spec.slice_counts == (5, 10, 15)
        assert spec.trials == 100
        assert spec.algorithms == ALGORITHMS
        assert spec.exact_time_limit == 60.0
        assert spec.threads == 1
        assert spec.agent_keys == ["urllc", "embb", "mmtc", "monolithic"]

    def test_threads_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "4")
        assert ExperimentSpec().threads == 4
        monkeypatch.setenv(THREADS_ENV, "0")
        assert ExperimentSpec().threads == 1
        monkeypatch.setenv(THREADS_ENV, "many")
        with pytest.raises(ValueError):
            ExperimentSpec()

    def test_from_dict(self):
        spec = ExperimentSpec.from_dict(
            {
                "slice_counts": [5],
                "trials": 2,
                "algorithms": ["cost", "mono"],
                "seeds": 7,
                "exact_time_limit": None,
                "scenario": {"cost_form": "weighted_sum"},
            }
        )
        assert spec.slice_counts == (5,)
        assert spec.seed == 7
        assert spec.exact_time_limit is None
        assert spec.scenario.cost_form == "weighted_sum"
        assert spec.agent_keys == ["monolithic"]

    def test_from_file(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({"trials": 5, "algorithms": ["exact"]}))
        assert ExperimentSpec.from_file(path) == ExperimentSpec(
            trials=5, algorithms=("exact",)
        )

    @pytest.mark.parametrize(
        "document",
        [
            {"trails": 3},
            {"algorithms": ["greedy"]},
            {"trials": 0},
            {"slice_counts": []},
            {"latency_samples_per_slice": 0},
            {"exact_time_limit": -1},
        ],
    )
    def test_invalid(self, document):
        with pytest.raises(ValueError):
            ExperimentSpec.from_dict(document)


class TestRun:
    def test_row_count_and_order(self, small_rows):
        assert len(small_rows) == 5 * 2 * 3
        keys = [(r.algorithm, r.slice_count, r.trial) for r in small_rows]
        assert keys == [(a, n, t) for a in BASELINES for n in (2, 3) for t in range(3)]

    def test_slices_are_conserved(self, small_rows):
        for row in small_rows:
            assert row.placed_slices + row.rejected_slices == row.slice_count

    def test_scenarios_are_shared(self, small_rows, small_spec):
        for row in small_rows:
            assert row.scenario_seed == scenario_seed(
                small_spec.seed, row.slice_count, row.trial
            )
            assert row.offered_cpu_load_pct == pytest.approx(
                100 * row.slice_count * SLICE_CPU / 112
            )

    def test_exact_is_cheapest_feasible(self, small_rows):
        frame = rows_to_frame(small_rows)
        exact = frame[frame.algorithm == "exact"].set_index(["slice_count", "trial"])
        assert exact.feasible.all() and exact.optimal.all()
        assert (exact.sla_violation_pct.notna()).all()
        for row in small_rows:
            if row.feasible:
                best = exact.loc[(row.slice_count, row.trial), "cost_per_hour"]
                assert best <= row.cost_per_hour * (1 + 1e-9)

    def test_cost_aware_beats_performance_aware(self, small_rows):
        frame = rows_to_frame(small_rows).set_index(["algorithm", "slice_count", "trial"])
        for n in (2, 3):
            for trial in range(3):
                assert (
                    frame.loc[("cost", n, trial), "cost_per_hour"]
                    <= frame.loc[("perf", n, trial), "cost_per_hour"]
                )

    def test_threads_do_not_change_results(self, small_rows, small_spec):
        threaded = run_experiment(
            ExperimentSpec(
                slice_counts=(2, 3), trials=3, algorithms=BASELINES, threads=3
            ),
            progress=False,
        )
        columns = ["algorithm", "slice_count", "trial", "cost_per_hour", "sla_violation_pct"]
        pd.testing.assert_frame_equal(
            rows_to_frame(threaded)[columns], rows_to_frame(small_rows)[columns]
        )

    def test_rl_algorithms_need_checkpoints(self, tmp_path):
        spec = ExperimentSpec(slice_counts=(2,), trials=1, algorithms=("cost", "marl"))
        with pytest.raises(MissingCheckpointError):
            run_experiment(spec, progress=False)
        with pytest.raises(MissingCheckpointError, match="urllc"):
            run_experiment(spec, checkpoints=tmp_path, progress=False)

    def test_rl_algorithms_with_bundle(self):
        spec = ExperimentSpec(
            slice_counts=(4,), trials=2, algorithms=("marl", "mono"), threads=1
        )
        rows = run_experiment(
            spec, bundle=untrained_bundle(monolithic=True), progress=False
        )
        assert [r.algorithm for r in rows] == ["marl", "marl", "mono", "mono"]
        for row in rows:
            assert row.placed_slices + row.rejected_slices == 4
            assert row.parallel_decision_time_s <= row.decision_time_s

    def test_no_placement_row(self):
        tiny = (
            Infrastructure(0, Tier.edge, 1.0, 1.0, 0.010, 5.0),
            Infrastructure(1, Tier.distributed, 1.0, 1.0, 0.005, 7.5),
            Infrastructure(2, Tier.central, 2.0, 2.0, 0.001, 10.0),
        )
        spec = ExperimentSpec(
            slice_counts=(2,),
            trials=1,
            algorithms=("cost", "exact"),
            scenario=ScenarioConfig(infrastructures=tiny),
        )
        for row in run_experiment(spec, progress=False):
            assert math.isnan(row.cost_per_hour)
            assert math.isnan(row.sla_violation_pct)
            assert row.rejected_slices == 2
            assert not row.feasible


class TestMeasure:
    def test_common_random_numbers(self):
        scenario = scenario_of([EMBB, EMBB, EMBB])
        spec = ExperimentSpec(latency_samples_per_slice=50, threads=1)
        placement = all_central(scenario)
        for request in scenario.requests:
            placement.assign(request.id, 6, 1)
        a = measure(finish_result(placement, scenario, "cost", 0.1), scenario, spec, 3, 0)
        b = measure(finish_result(placement, scenario, "perf", 0.2), scenario, spec, 3, 0)
        assert a.sla_violation_pct == b.sla_violation_pct
        assert a.decision_time_s != b.decision_time_s
        assert latency_rng(0, 3, 0, 1).random() == latency_rng(0, 3, 0, 1).random()
        assert latency_rng(0, 3, 0, 1).random() != latency_rng(0, 3, 0, 2).random()

    def test_budget_is_exclusive(self):
        # Same-host hops have no variance, so all-central URLLC lands on 10 ms
        scenario = scenario_of([URLLC, URLLC])
        spec = ExperimentSpec(latency_samples_per_slice=5, threads=1)
        row = measure(
            finish_result(all_central(scenario), scenario, "cost", 0.0), scenario, spec, 2, 0
        )
        assert row.sla_violation_pct == 100.0
        assert not row.feasible

    def test_utilization(self):
        scenario = generate_scenario(2, 0)
        spec = ExperimentSpec(threads=1)
        row = measure(
            finish_result(all_central(scenario), scenario, "cost", 0.0),
            scenario,
            spec,
            2,
            0,
        )
        assert row.cpu_util_central_pct == pytest.approx(100 * 2 * SLICE_CPU / 64)
        assert row.cpu_util_edge_pct == 0.0
        assert row.used_cpu == pytest.approx(row.placed_cpu)
        assert row.parallel_decision_time_s == row.decision_time_s

    def test_rejected_slices_are_left_out(self):
        scenario = scenario_of([URLLC, URLLC])
        placement = all_central(scenario).restricted_to(["s1"])
        result = finish_result(placement, scenario, "marl", 0.0, rejected=["s0"])
        row = measure(result, scenario, ExperimentSpec(threads=1), 2, 0)
        assert (row.placed_slices, row.rejected_slices) == (1, 1)
        assert row.placed_cpu == pytest.approx(SLICE_CPU)

    def test_missing_placement(self):
        scenario = generate_scenario(3, 0)
        result = SolveResult(placement=None, cost=math.inf, algorithm="perf")
        row = measure(result, scenario, ExperimentSpec(threads=1), 3, 0)
        assert row.rejected_slices == 3
        assert math.isnan(row.cost_per_hour)
        assert row.mem_util_central_pct == 0.0


class TestReport:
    def test_emit_is_byte_identical(self, small_rows, tmp_path):
        first = emit_report(small_rows, tmp_path / "a")
        second = emit_report(small_rows, tmp_path / "b")
        assert [p.name for p in first] == ["metrics.csv", "summary.csv", "summary.txt"]
        for (a, b) in zip(first, second):
            assert a.read_bytes() == b.read_bytes()
        assert "speed-up vs exact" in first[2].read_text()

    def test_metrics_file_keeps_rows(self, small_rows, tmp_path):
        (metrics, _, _) = emit_report(small_rows, tmp_path)
        frame = pd.read_csv(metrics)
        assert len(frame) == len(small_rows)
        assert list(frame.columns) == list(rows_to_frame(small_rows).columns)

    def test_empty_rows(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], tmp_path)

    def test_summary_means(self, small_rows):
        summary = summary_table(small_rows).set_index(["algorithm", "slice_count"])
        frame = rows_to_frame(small_rows)
        cost = frame[(frame.algorithm == "cost") & (frame.slice_count == 3)]
        assert summary.loc[("cost", 3), "cost_per_hour"] == pytest.approx(
            cost.cost_per_hour.mean()
        )
        assert summary.loc[("cost", 3), "trials"] == 3
        assert summary.loc[("exact", 2), "feasible_pct"] == 100.0

    def test_speedup(self, small_rows):
        table = speedup_table(small_rows).set_index(["algorithm", "slice_count"])
        assert table.loc[("exact", 2), "speedup"] == 1.0
        assert table.loc[("exact", 3), "parallel_speedup"] == 1.0
        assert (table.speedup > 0).all()
        with pytest.raises(ValueError):
            speedup_table([r for r in small_rows if r.algorithm != "exact"])
