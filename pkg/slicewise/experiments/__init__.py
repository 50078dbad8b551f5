from .harness import (
    MetricsRow,
    latency_rng,
    measure,
    run_algorithm,
    run_cell,
    run_experiment,
    scenario_seed,
)
from .report import (
    METRIC_COLUMNS,
    emit_report,
    rows_to_frame,
    speedup_table,
    summary_table,
)
from .spec import ALGORITHMS, THREADS_ENV, ExperimentSpec, default_threads
