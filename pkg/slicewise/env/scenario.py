"""
Scenario generation and the few numeric helpers every other module leans on.
"""

from dataclasses import replace
import math
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Sequence, Tuple, Union

import numpy as onp

from .catalog import ScenarioConfig, load_scenario_config
from .types import (
    LatencyModel,
    Plane,
    Scenario,
    SliceRequest,
    SliceType,
    VnfSpec,
)

if TYPE_CHECKING:
    from slicewise.traffic.lookup import ResourceLookupTable


def slice_total_demand(request: SliceRequest) -> Tuple[float, float]:
    """
    Component-wise demand of a slice.

    :return: (cpu cores, mem GiB)
    """
    return vnfs_total_demand(request.vnfs)


def vnfs_total_demand(vnfs: Sequence[VnfSpec]) -> Tuple[float, float]:
    cpu = math.fsum(v.cpu_demand for v in vnfs)
    mem = math.fsum(v.mem_demand for v in vnfs)
    return cpu, mem


def sample_link_latency(
    model: LatencyModel, m: int, m_prime: int, rng: onp.random.Generator
) -> float:
    """
    One Gaussian draw for the link between two infrastructures, clamped at 0.

    A standard normal is consumed even on the zero-variance diagonal, so two
    placements evaluated with the same rng see the same noise per hop.
    """
    link = model.link(m, m_prime)
    z = rng.standard_normal()
    return max(0.0, link.mean_ms + link.stddev_ms * float(z))


def build_request(
    index: int,
    slice_type: SliceType,
    config: ScenarioConfig,
    vnfs: Optional[Sequence[VnfSpec]] = None,
) -> SliceRequest:
    return SliceRequest(
        id=f"s{index}",
        slice_type=slice_type,
        vnfs=tuple(config.vnfs if vnfs is None else vnfs),
        latency_budget_ms=config.latency_budgets_ms[slice_type],
        consolidation_required=config.consolidation[slice_type],
        arrival_index=index,
    )


def draw_slice_types(
    n_slices: int, rng: onp.random.Generator, config: ScenarioConfig
) -> Tuple[SliceType, ...]:
    types = list(SliceType)
    probs = [config.type_probabilities.get(t, 0.0) for t in types]
    draws = rng.choice(len(types), size=n_slices, p=probs)
    return tuple(types[int(i)] for i in draws)


def generate_scenario(
    n_slices: int,
    seed: int,
    config: Optional[ScenarioConfig] = None,
    table: Optional["ResourceLookupTable"] = None,
) -> Scenario:
    """
    Draw a scenario of n_slices slices with i.i.d. multinomial types.

    The result is a pure function of (n_slices, seed, config).

    :param n_slices: number of slice requests
    :param seed: rng seed, stored on the scenario
    :param config: catalog and generation settings, defaults to the reference
        configuration
    :param table: lookup table for demand_source = "lookup"; defaults to the
        table seeded from measurements
    """
    if n_slices < 0:
        raise ValueError(f"n_slices must be >= 0, got {n_slices}")
    config = config or ScenarioConfig()
    rng = onp.random.default_rng(seed)

    if config.explicit_types and n_slices == len(config.explicit_types):
        slice_types = config.explicit_types
    else:
        slice_types = draw_slice_types(n_slices, rng, config)

    per_type_vnfs = {t: config.vnfs for t in SliceType}
    if config.demand_source == "lookup":
        if table is None:
            from slicewise.traffic.lookup import seed_table_from_measurements

            table = seed_table_from_measurements()
        per_type_vnfs = {
            t: apply_lookup_demands(config.vnfs, table, t, config.lookup_users)
            for t in SliceType
        }

    requests = tuple(
        build_request(i, t, config, per_type_vnfs[t])
        for (i, t) in enumerate(slice_types)
    )
    return Scenario(
        infrastructures=tuple(config.infrastructures),
        latency_model=config.latency_model,
        requests=requests,
        rng_seed=seed,
        cost_form=config.cost_form,
    )


def apply_lookup_demands(
    vnfs: Sequence[VnfSpec],
    table: "ResourceLookupTable",
    slice_type: SliceType,
    users: int,
) -> Tuple[VnfSpec, ...]:
    """
    Raise user-plane CPU demands by the measured traffic load.

    A VNF's cpu becomes its static demand plus cpu_percent / 100 cores for
    the given user count. Memory stays static since measurements carry none.
    VNFs the table does not know keep their static demand.
    """
    adjusted = []
    for vnf in vnfs:
        if vnf.plane is Plane.user and table.has_series(slice_type, vnf.name):
            demand = table.lookup(slice_type, vnf.name, users)
            vnf = replace(vnf, cpu_demand=vnf.cpu_demand + demand.cpu_percent / 100)
        adjusted.append(vnf)
    return tuple(adjusted)


def load_scenario(path: Union[str, Path], seed: Optional[int] = None) -> Scenario:
    """
    Read a JSON scenario file and generate its scenario.

    :param seed: overrides the seed stored in the file
    """
    config = load_scenario_config(path)
    return generate_scenario(
        config.n_slices, config.seed if seed is None else seed, config
    )
