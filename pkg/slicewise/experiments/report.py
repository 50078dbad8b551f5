from dataclasses import fields
import logging
from pathlib import Path
from typing import List, Sequence, Union

import pandas as pd

from slicewise.utils import timer_resolution

from .harness import MetricsRow

logger = logging.getLogger(__name__)

METRIC_COLUMNS = [f.name for f in fields(MetricsRow)]
GROUP_COLUMNS = ["algorithm", "slice_count"]
SUMMARY_COLUMNS = [
    "cost_per_hour",
    "decision_time_s",
    "parallel_decision_time_s",
    "sla_violation_pct",
    "consolidation_violation_pct",
    "rejected_slices",
    "offered_cpu_load_pct",
    "cpu_util_edge_pct",
    "cpu_util_distributed_pct",
    "cpu_util_central_pct",
    "mem_util_edge_pct",
    "mem_util_distributed_pct",
    "mem_util_central_pct",
]

Rows = Union[Sequence[MetricsRow], pd.DataFrame]


def rows_to_frame(rows: Rows) -> pd.DataFrame:
    """One row per MetricsRow, columns in field order, rows in the given order"""
    if isinstance(rows, pd.DataFrame):
        return rows[METRIC_COLUMNS].reset_index(drop=True)
    return pd.DataFrame([r.to_dict() for r in rows], columns=METRIC_COLUMNS)


def summary_table(rows: Rows) -> pd.DataFrame:
    """
    Mean of each metric per (algorithm, slice_count), plus the trial count.
    NaN metrics (runs without a placement) are left out of the means.
    """
    frame = rows_to_frame(rows)
    grouped = frame.groupby(GROUP_COLUMNS, sort=False)
    summary = grouped[SUMMARY_COLUMNS].mean()
    summary.insert(0, "trials", grouped.size())
    summary["feasible_pct"] = 100 * grouped["feasible"].mean()
    return summary.reset_index()


def speedup_table(rows: Rows, baseline: str = "exact") -> pd.DataFrame:
    """
    Mean baseline decision time over mean algorithm decision time, per
    (algorithm, slice_count).

    Mean times below the timer resolution are raised to it and the speed-up
    is flagged as a lower bound.

    :raises ValueError: if the rows hold no baseline runs
    """
    frame = rows_to_frame(rows)
    if not (frame["algorithm"] == baseline).any():
        raise ValueError(f"No {baseline} rows to compare against")
    resolution = timer_resolution()
    times = frame.groupby(GROUP_COLUMNS, sort=False)[
        ["decision_time_s", "parallel_decision_time_s"]
    ].mean()
    base = times.xs(baseline, level="algorithm")["decision_time_s"].clip(lower=resolution)

    records = []
    for ((algorithm, slice_count), row) in times.iterrows():
        if slice_count not in base.index:
            continue
        mean = row["decision_time_s"]
        parallel = row["parallel_decision_time_s"]
        records.append(
            {
                "algorithm": algorithm,
                "slice_count": slice_count,
                "mean_decision_time_s": mean,
                "speedup": base[slice_count] / max(mean, resolution),
                "parallel_speedup": base[slice_count] / max(parallel, resolution),
                "lower_bound": bool(mean < resolution),
            }
        )
    return pd.DataFrame(records)


def _summary_text(rows: Rows) -> str:
    summary = summary_table(rows)
    parts = []
    for (slice_count, group) in summary.groupby("slice_count", sort=True):
        load = group["offered_cpu_load_pct"].mean()
        parts.append(f"== {slice_count} slices (offered CPU load {load:.1f}%) ==")
        columns = [
            "algorithm",
            "trials",
            "cost_per_hour",
            "decision_time_s",
            "sla_violation_pct",
            "rejected_slices",
            "feasible_pct",
        ]
        parts.append(group[columns].to_string(index=False))
        parts.append("")
    frame = rows_to_frame(rows)
    if (frame["algorithm"] == "exact").any():
        parts.append("== speed-up vs exact ==")
        parts.append(speedup_table(rows).to_string(index=False))
        parts.append("")
    return "\n".join(parts)


def emit_report(rows: Rows, path: Union[str, Path]) -> List[Path]:
    """
    Write metrics.csv, summary.csv and summary.txt into the directory path.

    Identical rows give byte-identical files.

    :raises ValueError: on empty rows
    """
    frame = rows_to_frame(rows)
    if frame.empty:
        raise ValueError("No metrics rows to report")
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)

    written = [
        directory / "metrics.csv",
        directory / "summary.csv",
        directory / "summary.txt",
    ]
    frame.to_csv(written[0], index=False)
    summary_table(frame).to_csv(written[1], index=False)
    written[2].write_text(_summary_text(frame))
    logger.info("Wrote %d metrics rows to %s", len(frame), directory)
    return written