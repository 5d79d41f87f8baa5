"""Public plant API: assembly of the mass matrix / bias / input vectors, state
derivative, RK4 stepping and energies.

Functions accept either a :class:`PlantState` or its flat vector and return the
same kind they were given.
"""
from __future__ import annotations

import numpy as np

from . import _kernels as k
from .params import SystemParams
from .state import ActuatorInput, DisturbanceSet, PlantState

COND_WARN = 1e10


class NumericalFailure(RuntimeError):
    """Linear solve or integration produced non-finite values."""

    def __init__(self, msg: str, condition: float = float("nan"), time: float | None = None):
        super().__init__(msg)
        self.condition = condition
        self.time = time


def _vec(state, params: SystemParams) -> np.ndarray:
    if isinstance(state, PlantState):
        return state.pack()
    y = np.ascontiguousarray(state, dtype=float)
    if y.shape != (params.arrays.state_size,):
        raise ValueError(f"state vector must have length {params.arrays.state_size}")
    return y


def _like(template, y, params):
    return PlantState.unpack(y, params) if isinstance(template, PlantState) else y


def _inputs(params, u, dist):
    a = params.arrays
    u = ActuatorInput.zero(a.n) if u is None else u
    dist = DisturbanceSet() if dist is None else dist
    P, F, T = dist.kernel_terms(params)
    return (np.ascontiguousarray(u.thrust, dtype=float), np.ascontiguousarray(u.torque, dtype=float), F, P, T)


def quad_position(state, params: SystemParams, i: int) -> np.ndarray:
    if not 0 <= i < params.n:
        raise IndexError(f"quadrotor index {i} out of range")
    pos, _ = k.quad_kinematics(_vec(state, params), params.arrays.start, params.arrays.dvec)
    return pos[i]


def quad_velocity(state, params: SystemParams, i: int) -> np.ndarray:
    if not 0 <= i < params.n:
        raise IndexError(f"quadrotor index {i} out of range")
    _, vel = k.quad_kinematics(_vec(state, params), params.arrays.start, params.arrays.dvec)
    return vel[i]


def quad_kinematics(state, params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """All quadrotor positions and velocities, each ``(n, 3)``."""
    return k.quad_kinematics(_vec(state, params), params.arrays.start, params.arrays.dvec)


def assemble_M(state, params: SystemParams) -> np.ndarray:
    a = params.arrays
    return k.mass_matrix(_vec(state, params), a.start, a.dvec, a.Mq, a.Mc, a.MT, a.Jl)


def assemble_C(state, params: SystemParams) -> np.ndarray:
    return k.bias_vector(_vec(state, params), *params.arrays.dyn())


def assemble_P(state, params: SystemParams, u: ActuatorInput, quad_force=None) -> np.ndarray:
    """Generalized input of the thrusts (plus optional external forces at the quads)."""
    a = params.arrays
    y = _vec(state, params)
    F = k.thrust_forces(y, a.n, a.N, np.asarray(u.thrust, dtype=float))
    if quad_force is not None:
        F = F + np.asarray(quad_force, dtype=float).reshape(a.n, 3)
    return k.force_vector(y, a.start, a.dvec, F)


def regularized_condition(state, params: SystemParams) -> float:
    """2-norm condition number of the mass matrix actually factorized."""
    a = params.arrays
    M = k.regularized_mass_matrix(_vec(state, params), a.start, a.dvec, a.Mq, a.Mc, a.MT, a.Jl)
    return float(np.linalg.cond(M))


def accelerations(state, params: SystemParams, u: ActuatorInput | None = None,
                  dist: DisturbanceSet | None = None) -> np.ndarray:
    """``Xdot = [v_l dot, Omega_l dot, omega dot per segment, l ddot per segment]``."""
    y = _vec(state, params)
    thrust, _, F, P, _ = _inputs(params, u, dist)
    X, ok = k.accelerations(y, *params.arrays.dyn(), thrust, F, P)
    if not ok:
        raise NumericalFailure("non-finite accelerations", regularized_condition(y, params))
    return X


def state_derivative(state, params: SystemParams, u: ActuatorInput | None = None,
                     dist: DisturbanceSet | None = None):
    a = params.arrays
    y = _vec(state, params)
    thrust, torque, F, P, T = _inputs(params, u, dist)
    try:
        dy, ok = k.state_rate(y, *a.dyn(), a.Jq, a.Jq_inv, thrust, torque, F, P, T)
    except Exception as exc:  # singular factorization inside the kernel
        raise NumericalFailure(str(exc), regularized_condition(y, params)) from exc
    if not ok:
        raise NumericalFailure("non-finite state derivative", regularized_condition(y, params))
    return _like(state, dy, params)


def integrate_step(state, params: SystemParams, u: ActuatorInput | None, dist: DisturbanceSet | None,
                   dt: float, return_drift: bool = False):
    """One classical RK4 step followed by constraint enforcement.

    With ``return_drift`` also returns the largest constraint violation seen
    before enforcement.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    a = params.arrays
    y = _vec(state, params)
    thrust, torque, F, P, T = _inputs(params, u, dist)
    try:
        out, drift, ok = k.rk4_step(y, float(dt), *a.dyn(), a.Jq, a.Jq_inv, thrust, torque, F, P, T)
    except Exception as exc:
        raise NumericalFailure(str(exc), regularized_condition(y, params)) from exc
    if not ok or not np.all(np.isfinite(out)):
        raise NumericalFailure("integration produced non-finite values", regularized_condition(y, params))
    res = _like(state, out, params)
    return (res, drift) if return_drift else res


def integrate_steps(state, params: SystemParams, u: ActuatorInput | None, dist: DisturbanceSet | None,
                    dt: float, steps: int, t0: float = 0.0):
    """``steps`` RK4 steps with inputs held constant; returns ``(state, worst drift)``.

    ``t0`` only labels a failure with the time of the failing step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    a = params.arrays
    y = _vec(state, params)
    thrust, torque, F, P, T = _inputs(params, u, dist)
    out, drift, ok, done = k.advance(y, float(dt), int(steps), *a.dyn(), a.Jq, a.Jq_inv, thrust, torque, F, P, T)
    if not ok:
        t = t0 + done * dt
        raise NumericalFailure(f"integration failed at t = {t:.6g} s", regularized_condition(y, params), t)
    return _like(state, out, params), drift


def point_masses(state, params: SystemParams):
    """Positions and velocities of every lumped mass.

    Returns ``(pos, vel, mass)`` with quadrotors first, then cable point
    masses cable-major. The load itself is not included.
    """
    ps = state if isinstance(state, PlantState) else PlantState.unpack(state, params)
    pos, vel, mass = [], [], []
    Rl, Om = ps.R_l, ps.Omega_l
    for i, (cab, qp) in enumerate(zip(ps.cables, params.quads)):
        d = params.body.attachments[i]
        base = ps.r_l + Rl @ d
        vbase = ps.v_l + Rl @ np.cross(Om, d)
        terms = [s.l * s.q for s in cab.segments]
        rates = [s.l_dot * s.q + s.l * np.cross(s.omega, s.q) for s in cab.segments]
        pos.append(base - np.sum(terms, axis=0))
        vel.append(vbase - np.sum(rates, axis=0))
        mass.append(qp.mass)
    for i, cab in enumerate(ps.cables):
        d = params.body.attachments[i]
        base = ps.r_l + Rl @ d
        vbase = ps.v_l + Rl @ np.cross(Om, d)
        n_i = len(cab)
        for j in range(1, n_i + 1):
            segs = cab.segments[j:]
            pos.append(base - sum((s.l * s.q for s in segs), np.zeros(3)))
            vel.append(vbase - sum((s.l_dot * s.q + s.l * np.cross(s.omega, s.q) for s in segs), np.zeros(3)))
            mass.append(params.cables[i].mass[j - 1])
    return np.array(pos).reshape(-1, 3), np.array(vel).reshape(-1, 3), np.array(mass)


def total_energy(state, params: SystemParams) -> tuple[float, float]:
    """Kinetic and potential energy ``(T, V)`` in joules.

    Includes the quadrotors' rotational energy. Gravity acts on every lumped
    mass with the same sign; springs store 1/2 K dl^2 only while taut.
    """
    a = params.arrays
    T, V = k.energy(_vec(state, params), a.start, a.dvec, a.mquad, a.mseg, a.ml, a.Jl, a.Jq, a.K, a.L, a.g)
    return float(T), float(V)
