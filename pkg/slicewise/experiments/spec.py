from dataclasses import dataclass, field
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from slicewise.env.catalog import ScenarioConfig, scenario_config_from_dict

# Placement algorithms the harness knows, by short name
ALGORITHMS: Tuple[str, ...] = ("exact", "cost", "perf", "random", "balance", "marl", "mono")
RL_ALGORITHMS = ("marl", "mono")

THREADS_ENV = "SLICEWISE_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(1, threads)


@dataclass(frozen=True)
class ExperimentSpec:
    """
    One experiment matrix: every algorithm on trials scenarios per slice
    count. Trial scenarios depend on (seed, slice count, trial) only.
    """

    slice_counts: Tuple[int, ...] = (5, 10, 15)
    trials: int = 100
    algorithms: Tuple[str, ...] = ALGORITHMS
    seed: int = 0
    latency_samples_per_slice: int = 1
    exact_time_limit: Optional[float] = 60.0
    threads: int = field(default_factory=default_threads)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.algorithms:
            raise ValueError("Need at least one algorithm")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"Unknown algorithms {unknown}; known: {list(ALGORITHMS)}")
        if not self.slice_counts or any(n < 0 for n in self.slice_counts):
            raise ValueError(f"Bad slice counts {self.slice_counts}")
        if self.latency_samples_per_slice < 1:
            raise ValueError("latency_samples_per_slice must be >= 1")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.exact_time_limit is not None and self.exact_time_limit <= 0:
            raise ValueError("exact_time_limit must be positive")

    @property
    def agent_keys(self) -> List[str]:
        """Checkpoints the RL algorithms in this spec need"""
        keys: List[str] = []
        if "marl" in self.algorithms:
            keys.extend(["urllc", "embb", "mmtc"])
        if "mono" in self.algorithms:
            keys.append("monolithic")
        return keys

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentSpec":
        data = dict(data)
        kwargs: Dict[str, Any] = {}
        if "slice_counts" in data:
            kwargs["slice_counts"] = tuple(int(n) for n in data.pop("slice_counts"))
        if "algorithms" in data:
            kwargs["algorithms"] = tuple(str(a) for a in data.pop("algorithms"))
        if "seeds" in data:
            kwargs["seed"] = int(data.pop("seeds"))
        if "scenario" in data:
            kwargs["scenario"] = scenario_config_from_dict(data.pop("scenario"))
        for key in ("trials", "seed", "latency_samples_per_slice", "threads"):
            if key in data:
                kwargs[key] = int(data.pop(key))
        if "exact_time_limit" in data:
            limit = data.pop("exact_time_limit")
            kwargs["exact_time_limit"] = None if limit is None else float(limit)
        if data:
            raise ValueError(f"Unknown experiment keys {sorted(data)}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))
