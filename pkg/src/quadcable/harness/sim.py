"""Closed-loop simulation: controller wiring, trace recording and metrics."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from ..ctrl import (NavState, PIDState, SMCLaw, attitude_pid, formation_errors, leader_ref,
                    thrust_attitude_from_accel)
from ..geo3 import DegenerateAttitudeError, rot_to_euler
from ..plant import ActuatorInput, DisturbanceSet, NumericalFailure, integrate_steps, quad_kinematics, total_energy
from .config import ScenarioConfig, hover_thrusts
from .disturbance import active_events, inject_disturbance

MIN_LIFT_FRACTION = 0.2  # commanded vertical specific force never drops below this share of g


class ControlFailure(RuntimeError):
    """The attitude of a quadrotor or of the load left the Euler-angle chart."""


def trace_columns(n: int, m: int) -> list[str]:
    """Column names for ``n`` quadrotors with ``m`` segments per cable (1-based labels)."""
    cols = ["t_s"]
    cols += [f"load_{a}_m" for a in "xyz"] + [f"load_v{a}_mps" for a in "xyz"]
    cols += [f"load_{a}_rad" for a in ("phi", "theta", "psi")] + [f"load_w{a}_radps" for a in "xyz"]
    for i in range(1, n + 1):
        cols += [f"quad{i}_{a}_m" for a in "xyz"] + [f"quad{i}_{a}_rad" for a in ("phi", "theta", "psi")]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cols += [f"cable{i}_seg{j}_dl_m", f"cable{i}_seg{j}_wnorm_radps"]
    cols += ["E_inf_m", "E_norm_m", "Ev_norm_mps", "V_lyap", "V_lyap_rate"]
    cols += [f"thrust{i}_N" for i in range(1, n + 1)]
    cols += ["T_J", "V_J", "q_norm_residual", "q_omega_residual", "drift_pre_step"]
    return cols


@dataclass
class SimTrace:
    columns: list[str]
    data: np.ndarray  # (samples, columns)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float).reshape(-1, len(self.columns))
        if len(self.data) and np.any(np.diff(self.data[:, 0]) <= 0):
            raise ValueError("trace time must be strictly increasing")
        self._index = {c: k for k, c in enumerate(self.columns)}

    def __len__(self):
        return len(self.data)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self._index[name]]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    def load_position(self) -> np.ndarray:
        return self.data[:, 1:4]

    def matching(self, prefix: str, suffix: str = "") -> np.ndarray:
        idx = [k for k, c in enumerate(self.columns) if c.startswith(prefix) and c.endswith(suffix)]
        return self.data[:, idx]


@dataclass(frozen=True)
class Metrics:
    settling_time_s: float          # inf when the run never settles
    steady_state_error_m: float     # final load position error, infinity norm
    max_post_disturbance_deviation_m: float
    energy_drift_rel: float

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) >= 0:
                raise ValueError(f"metric {f.name} must be nonnegative")

    def to_json(self) -> str:
        d = {k: (None if math.isinf(v) else v) for k, v in dataclasses.asdict(self).items()}
        return json.dumps(d, indent=2)


class FormationController:
    """Navigation, sliding-mode formation control, thrust extraction and attitude PID."""

    def __init__(self, config: ScenarioConfig):
        self.cfg = config
        self.law = SMCLaw(config.graph, config.gains.smc)
        self.nav = NavState()
        self.pid = [PIDState() for _ in range(config.params.n)]
        self.mass = config.command_mass()
        self.tan_max = math.tan(config.max_tilt)

    def limit(self, u: np.ndarray) -> np.ndarray:
        """Clip a commanded acceleration to positive lift and the tilt limit."""
        g = self.cfg.params.g
        lift = max(g - u[2], MIN_LIFT_FRACTION * g)
        h = math.hypot(u[0], u[1])
        scale = min(1.0, self.tan_max * lift / h) if h > 0 else 1.0
        return np.array([u[0] * scale, u[1] * scale, g - lift])

    def __call__(self, y: np.ndarray, first: bool):
        cfg, p = self.cfg, self.cfg.params
        a = p.arrays
        pos, vel = quad_kinematics(y, p)
        dt = 0.0 if first else cfg.control_period
        r_led, v_led, self.nav = leader_ref(y[0:3], y[3:6], cfg.desired_pos, cfg.desired_vel, self.nav,
                                            cfg.gains.nav, dt)
        E, Ev = formation_errors(pos, vel, r_led, v_led, cfg.graph, cfg.formation)
        S = self.law.surface(E, Ev)
        U = self.law.control(S, vel.reshape(-1), v_led, np.zeros(3)).reshape(-1, 3)
        thrust = np.empty(p.n)
        torque = np.empty((p.n, 3))
        o = a.state_size - 12 * p.n
        for i in range(p.n):
            sp = thrust_attitude_from_accel(self.limit(U[i]), self.mass[i], p.g)
            Ri = y[o + 9 * i:o + 9 * i + 9].reshape(3, 3)
            Wi = y[o + 9 * p.n + 3 * i:o + 9 * p.n + 3 * i + 3]
            try:
                eul = rot_to_euler(Ri)
            except DegenerateAttitudeError as exc:
                raise ControlFailure(f"quadrotor {i + 1}: {exc}") from None
            torque[i], self.pid[i] = attitude_pid(eul, Wi, sp, self.pid[i], cfg.gains.pid, dt)
            thrust[i] = sp.thrust
        return ActuatorInput(thrust, torque), E, Ev, S


class HoverController:
    """Open-loop static hover thrust, zero torque."""

    def __init__(self, config: ScenarioConfig):
        self.u = ActuatorInput(hover_thrusts(config.params), np.zeros((config.params.n, 3)))
        self.zeros = np.zeros(3 * config.params.n)

    def __call__(self, y, first):
        return self.u, self.zeros, self.zeros, self.zeros


def _sample(t, y, cfg, u, E, Ev, S, V_rate, drift):
    p = cfg.params
    a = p.arrays
    n, N = a.n, a.N
    q = y[18:18 + 3 * N].reshape(N, 3)
    w = y[18 + 3 * N:18 + 6 * N].reshape(N, 3)
    l = y[18 + 6 * N:18 + 7 * N]
    Rq = y[18 + 8 * N:18 + 8 * N + 9 * n].reshape(n, 3, 3)
    pos, _ = quad_kinematics(y, p)
    try:
        row = [t, *y[0:6], *rot_to_euler(y[6:15].reshape(3, 3)), *y[15:18]]
        for i in range(n):
            row += [*pos[i], *rot_to_euler(Rq[i])]
    except DegenerateAttitudeError as exc:
        raise ControlFailure(f"t = {t:.6g} s: {exc}") from None
    seg = np.column_stack([l - a.L, np.linalg.norm(w, axis=1)])
    row += list(seg.reshape(-1))
    En, Vn = total_energy(y, p)
    row += [float(np.max(np.abs(E))) if len(E) else 0.0, float(np.linalg.norm(E)), float(np.linalg.norm(Ev)),
            0.5 * float(S @ S), V_rate]
    row += list(u.thrust)
    qerr = float(np.max(np.abs(np.linalg.norm(q, axis=1) - 1.0)))
    werr = float(np.max(np.abs(np.sum(q * w, axis=1))))
    row += [En, Vn, qerr, werr, drift]
    return row


def run_simulation(config: ScenarioConfig, nominal: "SimTrace | None | bool" = None, controller: str = "formation"):
    """Simulate ``config``; returns ``(SimTrace, Metrics)``.

    ``controller`` is ``"formation"`` or ``"hover"`` (open-loop hover thrust).
    When the schedule has disturbances the deviation metric needs an
    undisturbed reference: pass it as ``nominal``, or leave ``None`` to
    simulate it here; ``False`` skips it and reports zero.
    """
    cfg = config
    p = cfg.params
    ctl = FormationController(cfg) if controller == "formation" else HoverController(cfg)
    y = cfg.initial.pack()
    steps = round(cfg.duration / cfg.control_period)
    sub = cfg.substeps
    base = DisturbanceSet.zero(p)
    cache = {}
    rows = []
    V_prev = None
    drift = 0.0
    for k in range(steps + 1):
        t = k * cfg.control_period
        u, E, Ev, S = ctl(y, k == 0)
        V = 0.5 * float(S @ S)
        V_rate = 0.0 if V_prev is None else (V - V_prev) / cfg.control_period
        V_prev = V
        rows.append(_sample(t, y, cfg, u, E, Ev, S, V_rate, drift))
        if k == steps:
            break
        drift = 0.0
        j = 0
        while j < sub:
            tj = t + j * cfg.dt
            key = active_events(cfg.disturbances, tj)
            run = 1
            while j + run < sub and active_events(cfg.disturbances, t + (j + run) * cfg.dt) == key:
                run += 1
            if key not in cache:
                cache[key] = inject_disturbance(cfg.disturbances, tj, base)
            try:
                y, d = integrate_steps(y, p, u, cache[key], cfg.dt, run, tj)
            except NumericalFailure as exc:
                exc.time = tj if exc.time is None else exc.time
                raise
            drift = max(drift, d)
            j += run
    trace = SimTrace(trace_columns(p.n, len(p.cables[0].mass)), np.array(rows))
    if cfg.disturbances and nominal is None:
        nominal, _ = run_simulation(dataclasses.replace(cfg, disturbances=[]), controller=controller)
    return trace, compute_metrics(trace, cfg, nominal if isinstance(nominal, SimTrace) else None)


def settling_time(trace: SimTrace, threshold: float, column: str = "E_inf_m") -> float:
    """First time after which ``column`` stays below ``threshold``; inf if it ends above."""
    x = trace[column]
    above = np.nonzero(x >= threshold)[0]
    if len(above) == 0:
        return float(trace.t[0])
    if above[-1] == len(x) - 1:
        return math.inf
    return float(trace.t[above[-1] + 1])


def recovery_time(trace: SimTrace, t_event: float, threshold: float, window: float = 1.0,
                  column: str = "E_inf_m") -> float:
    """Time from ``t_event`` until ``column`` is back inside its pre-event band for good.

    The band is the larger of ``threshold`` and the column's maximum over the
    ``window`` seconds before the event.
    """
    t = trace.t
    x = trace[column]
    pre = x[(t >= t_event - window) & (t < t_event)]
    band = max(threshold, float(pre.max()) if len(pre) else 0.0)
    post = t >= t_event
    out = np.nonzero(post & (x > band))[0]
    if len(out) == 0:
        return 0.0
    if out[-1] == len(x) - 1:
        return math.inf
    return float(t[out[-1] + 1] - t_event)


def compute_metrics(trace: SimTrace, config: ScenarioConfig, nominal: SimTrace | None = None) -> Metrics:
    if len(trace) == 0:
        raise ValueError("empty trace")
    settle = settling_time(trace, config.settle_threshold)
    sse = float(np.max(np.abs(trace.load_position()[-1] - config.desired_pos)))
    dev = 0.0
    if config.disturbances and nominal is not None:
        t0 = min(ev.time for ev in config.disturbances)
        n = min(len(trace), len(nominal))
        mask = trace.t[:n] >= t0
        diff = trace.load_position()[:n][mask] - nominal.load_position()[:n][mask]
        dev = float(np.max(np.linalg.norm(diff, axis=1))) if len(diff) else 0.0
    E = trace["T_J"] + trace["V_J"]
    drift = float(abs(E[-1] - E[0]) / max(abs(E[0]), 1.0))
    return Metrics(settle, sse, dev, drift)


def write_trace(trace: SimTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trace.columns)
        for row in trace.data:
            w.writerow([f"{v:.17g}" for v in row])


def read_trace(path) -> SimTrace:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        cols = next(r)
        data = [[float(v) for v in row] for row in r]
    return SimTrace(cols, np.array(data).reshape(-1, len(cols)))
