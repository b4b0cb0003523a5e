"""Manufacturing line configuration, disturbance monitoring and reconfiguration.

The heavy lifting is in the compiled ``_core`` extension; this package only
re-exports it.
"""

from ._core import (
    CapabilityGraph,
    LineConfiguration,
    LineReconfError,
    bottleneck_time,
    monitor,
    pareto,
    reconfigure,
    run_scenario,
    simulate,
    solve_init,
    station_times,
)

__all__ = [
    "CapabilityGraph",
    "LineConfiguration",
    "LineReconfError",
    "bottleneck_time",
    "monitor",
    "pareto",
    "reconfigure",
    "run_scenario",
    "simulate",
    "solve_init",
    "station_times",
]
