"""
The default three-tier infrastructure and the seven-VNF slice catalog.
"""

from dataclasses import dataclass, field, replace
import json
from pathlib import Path
from typing import Dict, List, Mapping, Tuple, Union

from typing_extensions import Literal

from .types import (
    CostForm,
    Infrastructure,
    LatencyModel,
    LinkLatency,
    Plane,
    SliceType,
    Tier,
    VnfSpec,
)

DemandSource = Literal["static", "lookup"]

# Capacity in (cores, GiB), unit cost in $/h, DN latency in ms
DEFAULT_INFRASTRUCTURES = (
    Infrastructure(0, Tier.edge, 16.0, 16.0, 0.010, 5.0),
    Infrastructure(1, Tier.distributed, 32.0, 32.0, 0.005, 7.5),
    Infrastructure(2, Tier.central, 64.0, 64.0, 0.001, 10.0),
)

DEFAULT_VNFS = (
    VnfSpec("NRF", Plane.control, 0.15, 0.128),
    VnfSpec("UDR/UDM/AUSF", Plane.control, 0.65, 0.896),
    VnfSpec("AMF", Plane.control, 0.25, 0.256),
    VnfSpec("SMF", Plane.control, 0.25, 0.256),
    VnfSpec("UPF", Plane.user, 0.5, 0.512, chain_index=2),
    VnfSpec("CU", Plane.user, 0.5, 0.512, chain_index=1),
    VnfSpec("DU", Plane.user, 3.0, 2.0, chain_index=0),
)

EDGE_TO_DISTRIBUTED = LinkLatency(0.5, 0.1)
DISTRIBUTED_TO_CENTRAL = LinkLatency(20.0, 1.0)
# Not measured; routed through the distributed tier
EDGE_TO_CENTRAL = LinkLatency.compose(EDGE_TO_DISTRIBUTED, DISTRIBUTED_TO_CENTRAL)

DEFAULT_LATENCY_BUDGETS_MS = {
    SliceType.URLLC: 10.0,
    SliceType.eMBB: 20.0,
    SliceType.mMTC: 50.0,
}

DEFAULT_TYPE_PROBABILITIES = {
    SliceType.URLLC: 0.2,
    SliceType.eMBB: 0.3,
    SliceType.mMTC: 0.5,
}

DEFAULT_CONSOLIDATION = {
    SliceType.URLLC: False,
    SliceType.eMBB: False,
    SliceType.mMTC: True,
}

# Normalization constant for SLA parameters in the MDP state
SLA_SCALE_MS = 100.0


def default_latency_model() -> LatencyModel:
    return LatencyModel.from_links(
        3,
        {
            (0, 1): EDGE_TO_DISTRIBUTED,
            (1, 2): DISTRIBUTED_TO_CENTRAL,
            (0, 2): EDGE_TO_CENTRAL,
        },
    )


def default_catalog() -> Tuple[List[Infrastructure], List[VnfSpec], LatencyModel]:
    """
    The reference configuration: three tiers, seven VNFs, normal link latencies.

    :return: (infrastructures, VNF catalog, latency model)
    """
    return list(DEFAULT_INFRASTRUCTURES), list(DEFAULT_VNFS), default_latency_model()


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Everything needed to generate scenarios. Defaults reproduce the reference
    configuration; any field can be overridden from a scenario file.
    """

    infrastructures: Tuple[Infrastructure, ...] = DEFAULT_INFRASTRUCTURES
    vnfs: Tuple[VnfSpec, ...] = DEFAULT_VNFS
    latency_model: LatencyModel = field(default_factory=default_latency_model)
    latency_budgets_ms: Mapping[SliceType, float] = field(
        default_factory=lambda: dict(DEFAULT_LATENCY_BUDGETS_MS)
    )
    type_probabilities: Mapping[SliceType, float] = field(
        default_factory=lambda: dict(DEFAULT_TYPE_PROBABILITIES)
    )
    consolidation: Mapping[SliceType, bool] = field(
        default_factory=lambda: dict(DEFAULT_CONSOLIDATION)
    )
    cost_form: CostForm = "product"
    demand_source: DemandSource = "static"
    lookup_users: int = 200
    n_slices: int = 5
    seed: int = 0
    explicit_types: Tuple[SliceType, ...] = ()

    def __post_init__(self):
        total = sum(self.type_probabilities.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"Slice type probabilities must sum to 1, got {total}")
        if self.demand_source not in ("static", "lookup"):
            raise NotImplementedError(f"Unknown demand source {self.demand_source!r}")
        if self.n_slices < 0:
            raise ValueError("n_slices must be >= 0")


def _parse_pair(key: str) -> Tuple[int, int]:
    try:
        m, m_prime = key.split("-")
        return int(m), int(m_prime)
    except ValueError:
        raise ValueError(f"Latency pair keys look like '0-1', got {key!r}")


def _parse_type_map(raw: Mapping[str, object], cast) -> Dict[SliceType, object]:
    return {SliceType.parse(tag): cast(value) for (tag, value) in raw.items()}


def scenario_config_from_dict(data: Mapping) -> ScenarioConfig:
    """
    Build a ScenarioConfig from a parsed scenario document. Missing keys keep
    their defaults; the latency model starts from the default pairs when the
    infrastructure count matches, so a single "0-2" entry overrides D02.
    """
    config = ScenarioConfig()
    updates: Dict[str, object] = {}

    if "infrastructures" in data:
        updates["infrastructures"] = tuple(
            Infrastructure(
                id=i,
                tier=Tier.parse(entry["tier"]),
                cpu_capacity=float(entry["cpu"]),
                mem_capacity=float(entry["mem"]),
                unit_cost=float(entry["unit_cost"]),
                dn_latency_ms=float(entry["dn_latency_ms"]),
            )
            for (i, entry) in enumerate(data["infrastructures"])
        )
    infrastructures = updates.get("infrastructures", config.infrastructures)
    n = len(infrastructures)  # type: ignore

    if "latency" in data or "infrastructures" in data:
        links: Dict[Tuple[int, int], LinkLatency] = {}
        if n == len(config.infrastructures):
            links.update(
                {k: v for (k, v) in config.latency_model.pairwise.items() if k[0] < k[1]}
            )
        for key, (mean, stddev) in data.get("latency", {}).items():
            m, m_prime = _parse_pair(key)
            links[(min(m, m_prime), max(m, m_prime))] = LinkLatency(
                float(mean), float(stddev)
            )
        updates["latency_model"] = LatencyModel.from_links(n, links)

    if "vnfs" in data:
        updates["vnfs"] = tuple(
            VnfSpec(
                name=entry["name"],
                plane=Plane(entry["plane"]),
                cpu_demand=float(entry["cpu"]),
                mem_demand=float(entry["mem"]),
                chain_index=entry.get("chain_index"),
            )
            for entry in data["vnfs"]
        )
    if "latency_budgets_ms" in data:
        updates["latency_budgets_ms"] = {
            **config.latency_budgets_ms,
            **_parse_type_map(data["latency_budgets_ms"], float),
        }
    if "type_probabilities" in data:
        updates["type_probabilities"] = _parse_type_map(
            data["type_probabilities"], float
        )
    if "consolidation" in data:
        updates["consolidation"] = {
            **config.consolidation,
            **_parse_type_map(data["consolidation"], bool),
        }
    if "requests" in data:
        updates["explicit_types"] = tuple(
            SliceType.parse(entry["slice_type"] if isinstance(entry, dict) else entry)
            for entry in data["requests"]
        )
        updates["n_slices"] = len(updates["explicit_types"])  # type: ignore
    elif "slices" in data:
        updates["n_slices"] = int(data["slices"])
    for key in ("cost_form", "demand_source"):
        if key in data:
            updates[key] = str(data[key])
    for key in ("lookup_users", "seed"):
        if key in data:
            updates[key] = int(data[key])

    return replace(config, **updates)


def load_scenario_config(path: Union[str, Path]) -> ScenarioConfig:
    """Read a JSON scenario file"""
    with open(path) as f:
        return scenario_config_from_dict(json.load(f))
