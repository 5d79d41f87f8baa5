"""Navigation, sliding-mode formation control and attitude control."""
from dataclasses import dataclass

from .attitude import (AttitudeSetpoint, InfeasibleCommand, PIDGains, PIDState, accel_from_attitude,
                       attitude_pid, thrust_attitude_from_accel)
from .formation import FormationSpec, formation_errors
from .graph import CommGraph, GraphError, build_graph
from .navigation import NavigationGains, NavState, leader_ref
from .reduced import ReducedRun, SinusoidalDisturbance, simulate_reduced, sufficient_switching_gain
from .smc import SMCGains, SMCLaw, lyapunov_monitor, sliding_surface, smc_control, surface_rate, switching


@dataclass(frozen=True)
class ControlGains:
    nav: NavigationGains
    smc: SMCGains
    pid: PIDGains


__all__ = [
    "AttitudeSetpoint", "CommGraph", "ControlGains", "FormationSpec", "GraphError", "InfeasibleCommand",
    "NavState", "NavigationGains", "PIDGains", "PIDState", "ReducedRun", "SMCGains", "SMCLaw", "accel_from_attitude",
    "attitude_pid", "build_graph", "formation_errors", "leader_ref", "lyapunov_monitor", "simulate_reduced",
    "SinusoidalDisturbance", "sufficient_switching_gain", "sliding_surface", "smc_control", "surface_rate", "switching",
    "thrust_attitude_from_accel",
]
