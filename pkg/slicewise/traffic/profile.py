"""
Traffic profiles of a captured trace: windowed packet and bit rates,
inter-arrival statistics and the downlink share of bytes.
"""

from dataclasses import dataclass, field
import math
from typing import Dict, Optional, Sequence

import numpy as onp
import pandas as pd

from slicewise.env.types import SliceType

from .trace import Direction, TraceRecord

PERCENTILES = (50, 90, 99)
RATE_COLUMNS = [
    "window",
    "start_s",
    "packets",
    "bytes",
    "packets_per_s",
    "bits_per_s",
    "full",
]


@dataclass
class TrafficProfile:
    """
    rates has one row per window, starting at the first packet. A window is
    full when the trace extends to its end; the last window usually is not.
    """

    window_s: float
    rates: pd.DataFrame
    interarrival_mean_us: float
    interarrival_std_us: float
    interarrival_percentiles_us: Dict[int, float]
    direction_ratio: float
    n_packets: int
    duration_us: int
    slice_type: Optional[SliceType] = None
    extras: dict = field(default_factory=dict)

    @property
    def full_rates(self) -> pd.DataFrame:
        return self.rates[self.rates["full"]]

    def summary(self) -> pd.Series:
        data = {
            "slice_type": self.slice_type.value if self.slice_type else "",
            "window_s": self.window_s,
            "packets": self.n_packets,
            "duration_us": self.duration_us,
            "interarrival_mean_us": self.interarrival_mean_us,
            "interarrival_std_us": self.interarrival_std_us,
            "direction_ratio": self.direction_ratio,
        }
        for (p, value) in self.interarrival_percentiles_us.items():
            data[f"interarrival_p{p}_us"] = value
        return pd.Series(data)


def profile_trace(
    records: Sequence[TraceRecord],
    window: float = 1.0,
    slice_type: Optional[SliceType] = None,
) -> TrafficProfile:
    """
    :param records: trace records, sorted by timestamp
    :param window: window length in seconds
    :raises ValueError: with fewer than 2 records or a nonpositive window
    """
    if len(records) < 2:
        raise ValueError(f"Need at least 2 records to profile, got {len(records)}")
    if not window > 0:
        raise ValueError(f"window must be positive, got {window}")

    timestamps = onp.array([r.timestamp_us for r in records], dtype=onp.int64)
    order = onp.argsort(timestamps, kind="stable")
    timestamps = timestamps[order]
    sizes = onp.array([records[i].size_bytes for i in order], dtype=onp.int64)
    downlink = onp.array([records[i].direction is Direction.downlink for i in order])

    window_us = window * 1e6
    start, end = int(timestamps[0]), int(timestamps[-1])
    slots = onp.floor((timestamps - start) / window_us).astype(onp.int64)
    n_windows = int(slots[-1]) + 1
    packets = onp.bincount(slots, minlength=n_windows)
    volume = onp.bincount(slots, weights=sizes, minlength=n_windows)
    starts_us = start + onp.arange(n_windows) * window_us
    rates = pd.DataFrame(
        {
            "window": onp.arange(n_windows),
            "start_s": starts_us / 1e6,
            "packets": packets,
            "bytes": volume.astype(onp.int64),
            "packets_per_s": packets / window,
            "bits_per_s": volume * 8 / window,
            "full": starts_us + window_us <= end,
        },
        columns=RATE_COLUMNS,
    )

    gaps = onp.diff(timestamps).astype(onp.float64)
    percentiles = onp.percentile(gaps, PERCENTILES)
    total_bytes = int(sizes.sum())
    ratio = int(sizes[downlink].sum()) / total_bytes if total_bytes else math.nan

    return TrafficProfile(
        window_s=window,
        rates=rates,
        interarrival_mean_us=float(gaps.mean()),
        interarrival_std_us=float(gaps.std()),
        interarrival_percentiles_us={
            p: float(v) for (p, v) in zip(PERCENTILES, percentiles)
        },
        direction_ratio=ratio,
        n_packets=len(records),
        duration_us=end - start,
        slice_type=slice_type,
    )


def profile_to_frame(profile: TrafficProfile) -> pd.DataFrame:
    """Per-window rates with the trace-level statistics repeated on each row"""
    frame = profile.rates.copy()
    for (key, value) in profile.summary().items():
        if key not in frame.columns:
            frame[key] = value
    return frame
