"""Thrust / attitude extraction from an acceleration command and the attitude PID."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InfeasibleCommand(ValueError):
    """Acceleration command needs zero thrust or a tilt of at least 90 degrees."""


@dataclass(frozen=True)
class AttitudeSetpoint:
    phi: float
    theta: float
    thrust: float
    psi: float = 0.0


def accel_from_attitude(thrust: float, phi: float, theta: float, m: float, g: float) -> np.ndarray:
    """Translational acceleration of a point mass under thrust at (phi, theta, psi = 0)."""
    a = thrust / m
    return np.array([-a * np.cos(phi) * np.sin(theta), a * np.sin(phi), g - a * np.cos(phi) * np.cos(theta)])


def thrust_attitude_from_accel(u, m: float, g: float) -> AttitudeSetpoint:
    """Invert :func:`accel_from_attitude` for ``(U1, phi_d, theta_d)``."""
    ux, uy, uz = (float(c) for c in u)
    up = g - uz
    U1 = m * np.sqrt(ux * ux + uy * uy + up * up)
    if U1 <= 0.0:
        raise InfeasibleCommand("free-fall command: thrust is zero and the attitude is undefined")
    if up <= 0.0:
        raise InfeasibleCommand(f"command needs a tilt of 90 degrees or more (u_z = {uz:.6g} >= g)")
    return AttitudeSetpoint(float(np.arcsin(m * uy / U1)), float(np.arctan2(-ux, up)), float(U1))


@dataclass(frozen=True)
class PIDGains:
    kp: np.ndarray
    kd: np.ndarray
    ki: np.ndarray

    def __post_init__(self):
        for name in ("kp", "kd", "ki"):
            v = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (3,)).copy()
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ValueError(f"PID gain {name} must be finite and nonnegative")
            object.__setattr__(self, name, v)


@dataclass
class PIDState:
    integral: np.ndarray = field(default_factory=lambda: np.zeros(3))
    last_error: np.ndarray | None = None


def attitude_pid(euler, rates, setpoint: AttitudeSetpoint, state: PIDState, gains: PIDGains, dt: float = 0.0):
    """Torque ``[U2, U3, U4]`` and the advanced integrator state.

    Desired angular rates are zero. ``rates`` are the body angular velocity
    components; the error integral is advanced with the trapezoidal rule.
    """
    e = np.array([setpoint.phi, setpoint.theta, setpoint.psi]) - np.asarray(euler, dtype=float)
    e = (e + np.pi) % (2.0 * np.pi) - np.pi
    prev = e if state.last_error is None else state.last_error
    integral = state.integral + 0.5 * dt * (prev + e)
    tau = gains.kp * e - gains.kd * np.asarray(rates, dtype=float) + gains.ki * integral
    return tau, PIDState(integral, e)
