"""
Runs an ExperimentSpec: every algorithm on the same generated scenarios,
one MetricsRow per (algorithm, slice count, trial).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from tqdm.autonotebook import tqdm

from slicewise.constraints import check_consolidation, is_feasible, user_plane_latency
from slicewise.env.scenario import generate_scenario, slice_total_demand
from slicewise.env.types import Scenario, Tier
from slicewise.rl import MissingCheckpointError
from slicewise.scheduler import SchedulerBundle, load_bundle, place_slices
from slicewise.solvers import (
    SolveResult,
    place_cost_aware,
    place_load_balance,
    place_performance_aware,
    place_random,
    solve_exact,
)
from slicewise.utils import derive_seed, make_rng

from .spec import ALGORITHMS, ExperimentSpec

logger = logging.getLogger(__name__)


@dataclass
class MetricsRow:
    """
    Metrics of one algorithm on one trial scenario.

    Percentages are in [0, 100]. When an algorithm produced no placement,
    cost and SLA figures are NaN and every slice counts as rejected.
    """

    algorithm: str
    slice_count: int
    trial: int
    scenario_seed: int
    cost_per_hour: float
    decision_time_s: float
    parallel_decision_time_s: float
    sla_violation_pct: float
    consolidation_violation_pct: float
    placed_slices: int
    rejected_slices: int
    feasible: bool
    optimal: bool
    nodes_explored: int
    offered_cpu_load_pct: float
    placed_cpu: float
    placed_mem: float
    used_cpu: float
    used_mem: float
    cpu_util_edge_pct: float
    cpu_util_distributed_pct: float
    cpu_util_central_pct: float
    mem_util_edge_pct: float
    mem_util_distributed_pct: float
    mem_util_central_pct: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def scenario_seed(seed: int, slice_count: int, trial: int) -> int:
    return derive_seed(seed, slice_count, trial)


def latency_rng(seed: int, slice_count: int, trial: int, arrival_index: int):
    """Per-slice latency stream, shared by every algorithm in a trial"""
    return make_rng(seed, slice_count, trial, arrival_index, "latency")


def run_algorithm(
    algorithm: str,
    scenario: Scenario,
    spec: ExperimentSpec,
    bundle: Optional[SchedulerBundle] = None,
) -> SolveResult:
    if algorithm == "exact":
        return solve_exact(scenario, spec.exact_time_limit)
    elif algorithm == "cost":
        return place_cost_aware(scenario)
    elif algorithm == "perf":
        return place_performance_aware(scenario)
    elif algorithm == "random":
        return place_random(scenario, make_rng(scenario.rng_seed, "random"))
    elif algorithm == "balance":
        return place_load_balance(scenario)
    elif algorithm in ("marl", "mono"):
        if bundle is None:
            raise ValueError(f"{algorithm} needs trained agents")
        mode = "disaggregated" if algorithm == "marl" else "monolithic"
        return place_slices(bundle, scenario, mode)
    raise NotImplementedError(f"Unknown algorithm {algorithm!r}")


def _tier_utilization(used, capacity, scenario: Scenario) -> Dict[Tier, float]:
    util = {}
    for tier in Tier:
        members = [i.id for i in scenario.infrastructures if i.tier is tier]
        total = math.fsum(capacity[m] for m in members)
        util[tier] = 100 * math.fsum(used[m] for m in members) / total if total else 0.0
    return util


def measure(
    result: SolveResult,
    scenario: Scenario,
    spec: ExperimentSpec,
    slice_count: int,
    trial: int,
) -> MetricsRow:
    """
    Metrics of a finished placement.

    SLA violations count user-plane latency draws at or above the slice's
    budget, over placed slices; each slice draws from its own stream so
    algorithms are compared on the same samples.
    """
    offered_cpu = math.fsum(slice_total_demand(r)[0] for r in scenario.requests)
    offered = 100 * offered_cpu / math.fsum(scenario.cpu_capacity)
    row: Dict[str, object] = dict(
        algorithm=result.algorithm,
        slice_count=slice_count,
        trial=trial,
        scenario_seed=scenario.rng_seed,
        decision_time_s=result.wall_time,
        parallel_decision_time_s=(
            result.wall_time
            if result.parallel_wall_time is None
            else result.parallel_wall_time
        ),
        optimal=result.optimal,
        nodes_explored=result.nodes_explored,
        offered_cpu_load_pct=offered,
    )

    if result.placement is None:
        zeros = {f"{r}_util_{t.value}_pct": 0.0 for r in ("cpu", "mem") for t in Tier}
        row.update(
            cost_per_hour=math.nan,
            sla_violation_pct=math.nan,
            consolidation_violation_pct=math.nan,
            placed_slices=0,
            rejected_slices=len(scenario.requests),
            feasible=False,
            placed_cpu=0.0,
            placed_mem=0.0,
            used_cpu=0.0,
            used_mem=0.0,
            **zeros,
        )
        return MetricsRow(**row)  # type: ignore

    placed = result.placed_scenario(scenario)
    violations = samples = 0
    unconsolidated = 0
    for request in placed.requests:
        rng = latency_rng(spec.seed, slice_count, trial, request.arrival_index)
        for _ in range(spec.latency_samples_per_slice):
            latency = user_plane_latency(
                result.placement, request, scenario, "sampled", rng
            )
            violations += latency >= request.latency_budget_ms
            samples += 1
        if request.consolidation_required and not check_consolidation(
            result.placement, request
        ):
            unconsolidated += 1
    n_placed = len(placed.requests)

    cpu_used, mem_used = result.placement.used_resources(scenario)
    cpu_util = _tier_utilization(cpu_used, scenario.cpu_capacity, scenario)
    mem_util = _tier_utilization(mem_used, scenario.mem_capacity, scenario)
    demands = [slice_total_demand(r) for r in placed.requests]
    row.update(
        cost_per_hour=result.cost,
        sla_violation_pct=100 * violations / samples if samples else 0.0,
        consolidation_violation_pct=100 * unconsolidated / n_placed if n_placed else 0.0,
        placed_slices=n_placed,
        rejected_slices=len(scenario.requests) - n_placed,
        feasible=bool(is_feasible(result.placement, placed)),
        placed_cpu=math.fsum(d[0] for d in demands),
        placed_mem=math.fsum(d[1] for d in demands),
        used_cpu=math.fsum(cpu_used),
        used_mem=math.fsum(mem_used),
        **{f"cpu_util_{t.value}_pct": cpu_util[t] for t in Tier},
        **{f"mem_util_{t.value}_pct": mem_util[t] for t in Tier},
    )
    return MetricsRow(**row)  # type: ignore


def run_cell(
    spec: ExperimentSpec,
    slice_count: int,
    trial: int,
    bundle: Optional[SchedulerBundle] = None,
) -> List[MetricsRow]:
    """Every algorithm of the experiment on one trial scenario"""
    seed = scenario_seed(spec.seed, slice_count, trial)
    scenario = generate_scenario(slice_count, seed, spec.scenario)
    rows = []
    for algorithm in spec.algorithms:
        result = run_algorithm(algorithm, scenario, spec, bundle)
        rows.append(measure(result, scenario, spec, slice_count, trial))
    return rows


def run_experiment(
    spec: ExperimentSpec,
    checkpoints: Optional[Union[str, Path]] = None,
    bundle: Optional[SchedulerBundle] = None,
    progress: bool = True,
) -> List[MetricsRow]:
    """
    Run the whole experiment matrix.

    :param checkpoints: directory of agent checkpoints, needed when the experiment
        includes RL algorithms and no bundle is given
    :param bundle: trained agents to use instead of loading checkpoints
    :return: rows sorted by (algorithm, slice_count, trial)
    :raises MissingCheckpointError: before any trial runs, if an RL
        algorithm's checkpoints are absent
    """
    keys = spec.agent_keys
    if keys and bundle is None:
        if checkpoints is None:
            raise MissingCheckpointError(
                f"Algorithms {[a for a in spec.algorithms if a in ('marl', 'mono')]} "
                "need a checkpoint directory"
            )
        bundle = load_bundle(checkpoints, keys)

    cells: List[Tuple[int, int]] = [
        (n, trial) for n in spec.slice_counts for trial in range(spec.trials)
    ]

    def run(cell):
        return run_cell(spec, cell[0], cell[1], bundle)

    rows: List[MetricsRow] = []
    bar = tqdm(total=len(cells), desc="experiment", disable=not progress)
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            for cell_rows in pool.map(run, cells):
                rows.extend(cell_rows)
                bar.update()
    else:
        for cell in cells:
            rows.extend(run(cell))
            bar.update()
    bar.close()

    order = {a: i for (i, a) in enumerate(ALGORITHMS)}
    rows.sort(key=lambda r: (order[r.algorithm], r.slice_count, r.trial))
    logger.info(
        "Experiment done: %d algorithms, slice counts %s, %d trials each",
        len(spec.algorithms),
        list(spec.slice_counts),
        spec.trials,
    )
    return rows
