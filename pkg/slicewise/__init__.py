__version__ = "0.1.0"

import jax

# Network math runs in float64
jax.config.update("jax_enable_x64", True)

import slicewise.constraints  # noqa: E402
import slicewise.env  # noqa: E402
import slicewise.experiments  # noqa: E402
import slicewise.rl  # noqa: E402
import slicewise.scale  # noqa: E402
import slicewise.scheduler  # noqa: E402
import slicewise.solvers  # noqa: E402
import slicewise.static  # noqa: E402
import slicewise.traffic  # noqa: E402
import slicewise.utils  # noqa: E402

from .constraints import Placement, is_feasible, placement_cost  # noqa: E402
from .env import (  # noqa: E402
    Scenario,
    ScenarioConfig,
    SliceRequest,
    SliceType,
    default_catalog,
    generate_scenario,
    load_scenario,
)
from .solvers import (  # noqa: E402
    SolveResult,
    place_cost_aware,
    place_load_balance,
    place_performance_aware,
    place_random,
    solve_exact,
)
from .scheduler import SchedulerBundle, place_slices, train  # noqa: E402
