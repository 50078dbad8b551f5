from .lookup import (
    MEASURED_CPU_PERCENT,
    Demand,
    LookupMonotonicityWarning,
    ResourceLookupTable,
    lookup_demand,
    seed_table_from_measurements,
)
from .profile import TrafficProfile, profile_to_frame, profile_trace
from .trace import (
    Direction,
    TraceFormatError,
    TraceOrderWarning,
    TraceRecord,
    load_trace,
    records_to_frame,
    sort_records,
    write_trace,
)
