"""
Resource-demand lookup table: (slice type, VNF, active users) to the CPU and
memory a VNF needs under that load.

Between measured user counts demand is interpolated linearly; outside the
measured range the nearest measured value is returned and flagged as
clamped.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple, Union
import warnings

import numpy as onp
import pandas as pd
from scipy.interpolate import interp1d

from slicewise.env.types import SliceType

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["slice_type", "vnf", "users", "cpu_percent", "mem_mib"]

SeriesKey = Tuple[SliceType, str]
Entry = Tuple[float, Optional[float]]

# CPU load in percent of one core, by (slice type, VNF) and active users.
# No memory figures were measured.
MEASURED_CPU_PERCENT: Dict[SeriesKey, Dict[int, float]] = {
    (SliceType.eMBB, "DU"): {50: 11.01, 200: 31.67},
    (SliceType.eMBB, "CU"): {50: 9.18, 200: 31.04},
    (SliceType.eMBB, "UPF"): {50: 14.15, 200: 41.48},
    (SliceType.URLLC, "DU"): {200: 2.93},
    (SliceType.URLLC, "CU"): {200: 1.19},
    (SliceType.URLLC, "UPF"): {200: 2.71},
    # At 10 users mMTC stays below 1.5%, kept as that upper bound
    (SliceType.mMTC, "DU"): {10: 1.5, 200: 2.77},
    (SliceType.mMTC, "CU"): {10: 1.5, 200: 1.82},
    (SliceType.mMTC, "UPF"): {10: 1.5, 200: 2.82},
}


class LookupMonotonicityWarning(UserWarning):
    pass


class Demand(NamedTuple):
    cpu_percent: float
    mem_mib: Optional[float]
    clamped: bool


def _as_slice_type(slice_type: Union[SliceType, str]) -> SliceType:
    if isinstance(slice_type, SliceType):
        return slice_type
    return SliceType.parse(slice_type)


class ResourceLookupTable:
    def __init__(
        self, entries: Optional[Mapping[Tuple[SliceType, str, int], Entry]] = None
    ):
        self.entries: Dict[Tuple[SliceType, str, int], Entry] = {}
        for ((slice_type, vnf, users), (cpu, mem)) in (entries or {}).items():
            self.add(slice_type, vnf, users, cpu, mem)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, ResourceLookupTable):
            return NotImplemented
        return self.entries == other.entries

    def add(
        self,
        slice_type: Union[SliceType, str],
        vnf: str,
        users: int,
        cpu_percent: float,
        mem_mib: Optional[float] = None,
    ) -> "ResourceLookupTable":
        if users < 0 or cpu_percent < 0 or (mem_mib is not None and mem_mib < 0):
            raise ValueError(
                f"Negative entry for {vnf}: users {users}, "
                f"cpu {cpu_percent}, mem {mem_mib}"
            )
        key = (_as_slice_type(slice_type), vnf, int(users))
        mem = None if mem_mib is None else float(mem_mib)
        self.entries[key] = (float(cpu_percent), mem)
        return self

    @property
    def series_keys(self) -> List[SeriesKey]:
        keys = {(t, vnf) for (t, vnf, _) in self.entries}
        return sorted(keys, key=lambda k: (k[0].index, k[1]))

    def has_series(self, slice_type: Union[SliceType, str], vnf: str) -> bool:
        key = (_as_slice_type(slice_type), vnf)
        return any((t, v) == key for (t, v, _) in self.entries)

    def series(self, slice_type: Union[SliceType, str], vnf: str) -> pd.DataFrame:
        """Entries of one (slice type, VNF) series sorted by user count"""
        slice_type = _as_slice_type(slice_type)
        rows = sorted(
            (users, cpu, mem)
            for ((t, v, users), (cpu, mem)) in self.entries.items()
            if t is slice_type and v == vnf
        )
        if not rows:
            raise ValueError(f"No lookup entries for {slice_type.value} {vnf}")
        return pd.DataFrame(rows, columns=["users", "cpu_percent", "mem_mib"])

    def user_grid(self, slice_type: Union[SliceType, str], vnf: str) -> List[int]:
        return [int(u) for u in self.series(slice_type, vnf)["users"]]

    def lookup(
        self, slice_type: Union[SliceType, str], vnf: str, users: float
    ) -> Demand:
        """
        Demand of one VNF at the given user count.

        :raises ValueError: for an unknown (slice type, VNF) or negative users
        """
        if users < 0:
            raise ValueError(f"users must be >= 0, got {users}")
        slice_type = _as_slice_type(slice_type)
        exact = self.entries.get((slice_type, vnf, users))
        if exact is not None:
            return Demand(exact[0], exact[1], False)

        series = self.series(slice_type, vnf)
        grid = series["users"].to_numpy(dtype=onp.float64)
        cpus = series["cpu_percent"].to_numpy(dtype=onp.float64)
        mems = series["mem_mib"].tolist()
        has_mem = all(m is not None and not math.isnan(m) for m in mems)

        if users < grid[0] or users > grid[-1]:
            edge = 0 if users < grid[0] else -1
            logger.warning(
                "Clamped %s %s lookup at %s users to the measured range [%d, %d]",
                slice_type.value,
                vnf,
                users,
                grid[0],
                grid[-1],
            )
            return Demand(
                float(cpus[edge]), float(mems[edge]) if has_mem else None, True
            )

        cpu = float(interp1d(grid, cpus)(users))
        mem = None
        if has_mem:
            mem = float(interp1d(grid, onp.array(mems, dtype=onp.float64))(users))
        return Demand(cpu, mem, False)

    def validate(self) -> List[SeriesKey]:
        """
        Series whose CPU demand falls as users grow. Each one also raises a
        LookupMonotonicityWarning.
        """
        offending = []
        for (slice_type, vnf) in self.series_keys:
            cpus = self.series(slice_type, vnf)["cpu_percent"].to_numpy()
            if onp.any(onp.diff(cpus) < 0):
                offending.append((slice_type, vnf))
                warnings.warn(
                    f"CPU demand of {slice_type.value} {vnf} decreases with users",
                    LookupMonotonicityWarning,
                )
        return offending

    def to_frame(self) -> pd.DataFrame:
        keys = sorted(self.entries, key=lambda k: (k[0].index, k[1], k[2]))
        rows = [(k[0].value, k[1], k[2], *self.entries[k]) for k in keys]
        return pd.DataFrame(rows, columns=TABLE_COLUMNS)

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Unavailable memory is written as an empty field"""
        path = Path(path)
        self.to_frame().to_csv(path, index=False)
        return path

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "ResourceLookupTable":
        missing = [c for c in TABLE_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Lookup table lacks columns {missing}")
        table = cls()
        for row in frame.itertuples(index=False):
            mem = None if pd.isna(row.mem_mib) else float(row.mem_mib)
            table.add(
                row.slice_type, str(row.vnf), int(row.users), float(row.cpu_percent), mem
            )
        return table

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "ResourceLookupTable":
        frame = pd.read_csv(path, float_precision="round_trip")
        return cls.from_frame(frame)


def lookup_demand(
    table: ResourceLookupTable,
    slice_type: Union[SliceType, str],
    vnf: str,
    users: float,
) -> Demand:
    return table.lookup(slice_type, vnf, users)


def seed_table_from_measurements() -> ResourceLookupTable:
    """Table holding every measured CPU figure; memory is unavailable throughout"""
    table = ResourceLookupTable()
    for ((slice_type, vnf), points) in MEASURED_CPU_PERCENT.items():
        for (users, cpu) in points.items():
            table.add(slice_type, vnf, users, cpu)
    return table
