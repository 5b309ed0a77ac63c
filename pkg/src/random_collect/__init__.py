"""Random-Collect: random-walk data collection on graphs.

Exact steady-state rates, spectral and expansion bounds, and a slot-level
simulator to check them against.
"""
from .bounds import (
    LatencyBound,
    RateReport,
    build_rate_report,
    general_rate_lower_bound,
    general_upper_bound,
    latency_upper_bound,
    rc_upper_bound,
    srw_rate_lower_bound,
)
from .errors import BruteForceLimitError, NonReversibleError, SingularSystemError, TopologyError
from .graph import Graph, TopologySpec, build_topology, degree_stats, edge_boundary_size, edge_expansion_hat
from .simulator import Metrics, SimConfig, SweepResult, beta_sweep, run, stability_probe
from .steady_state import (
    OccupancyVector,
    critical_rate,
    expected_drift,
    solve_occupancy,
    table1_reference,
)
from .walk import (
    SpectrumResult,
    TransitionMatrix,
    cheeger_hat,
    hitting_times_to,
    second_eigenvalue,
    srw_matrix,
    stationary_dist,
    worst_case_hitting_time,
)

__all__ = [name for name in dir() if not name.startswith("_")]
