"""Event-triggered, observer-based fixed-time consensus for leader-follower networks."""

from .approximator import RbfNetwork, basis, evaluate, gain_magnitude, lattice_network
from .bounds import FixedTimeBound, FixedTimeCheck, settling_bound, verify_fixed_time
from .controller import (
    AdaptiveState,
    ControllerParams,
    TriggerState,
    adaptive_law,
    control_law_final,
    error_coordinates,
    event_output,
    should_trigger,
    virtual_control_first,
    virtual_control_mid,
)
from .engine import RbfConfig, Scenario, SimTrace, run, tracking_metrics, trigger_stats
from .observer import (
    LyapunovCertificate,
    ObserverGains,
    companion_matrix,
    is_hurwitz,
    observer_derivative,
    solve_lyapunov,
)
from .plant import ConstantLeader, DynamicsSpec, SineLeader, example_dynamics, follower_derivative, leader_eval
from .scenario import load_bundled, load_scenario
from .switching import DeadZone, dead_zone_indicator, sg, switched_error
from .topology import Topology, build_topology, consensus_error

__version__ = "0.1.0"
