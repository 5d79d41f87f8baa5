"""Scenario configuration, closed-loop simulation, traces, metrics and verification."""
from .config import (ConfigError, DisturbanceEvent, ScenarioConfig, bundled_scenarios, hover_state, hover_thrusts,
                     load_scenario, parse_scenario, read_document, static_weights)
from .disturbance import inject_disturbance
from .sim import (ControlFailure, Metrics, SimTrace, compute_metrics, read_trace, recovery_time, run_simulation,
                  settling_time, trace_columns, write_trace)

__all__ = [
    "ConfigError", "ControlFailure", "DisturbanceEvent", "Metrics", "ScenarioConfig", "SimTrace", "bundled_scenarios",
    "compute_metrics", "hover_state", "hover_thrusts", "inject_disturbance", "load_scenario", "parse_scenario",
    "read_document",
    "read_trace", "recovery_time", "run_simulation", "settling_time", "static_weights", "trace_columns",
    "write_trace",
]
