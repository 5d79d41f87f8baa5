"""Verification suites: oracle equivalence, energy behaviour, reduced-model Lyapunov
check and algebraic round trips. Each returns a :class:`Report`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cable import CableParams, CableSegmentState, CableState
from ..ctrl import (SMCGains, SinusoidalDisturbance, accel_from_attitude, build_graph, FormationSpec,
                    formation_errors, simulate_reduced, thrust_attitude_from_accel)
from ..geo3 import euler_to_rot, hat, rodrigues, rot_to_euler, vee
from ..plant import (ActuatorInput, BodyParams, PlantState, QuadParams, SystemParams, accelerations,
                     integrate_step, lagrangian_oracle, total_energy)

MODES = ("oracle", "energy", "smc-reduced", "roundtrip")

ORACLE_TOL = 1e-4
ENERGY_DRIFT_TOL = 1e-6
DISSIPATION_TOL = 1e-8
ROUNDTRIP_TOL = 1e-12


@dataclass
class Report:
    mode: str
    passed: bool
    residuals: dict = field(default_factory=dict)
    details: list[str] = field(default_factory=list)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        res = ", ".join(f"{k} = {v:.3g}" for k, v in self.residuals.items())
        return f"{status} {self.mode}: {res}"


def random_system(rng: np.random.Generator, n: int, m: int, damping: bool = True) -> SystemParams:
    body = BodyParams(rng.uniform(0.5, 2.0), np.diag(rng.uniform(0.05, 0.3, 3)), rng.uniform(-1, 1, (n, 3)))
    quads = [QuadParams(rng.uniform(0.5, 1.0), np.diag(rng.uniform(0.005, 0.02, 3))) for _ in range(n)]
    cables = [CableParams(rng.uniform(0.01, 0.1, m), rng.uniform(100, 1000, m),
                          rng.uniform(0, 5, m) if damping else np.zeros(m), rng.uniform(0.3, 0.7, m))
              for _ in range(n)]
    return SystemParams(body, quads, cables)


def random_state(rng: np.random.Generator, params: SystemParams, taut: bool | None = None) -> PlantState:
    """Random state; segments are taut, slack, or (``None``) either at random."""
    cables = []
    for c in params.cables:
        segs = []
        for L in c.rest_length:
            q = rng.normal(size=3)
            q /= np.linalg.norm(q)
            w = rng.normal(size=3)
            w -= (w @ q) * q
            sign = rng.choice([-1.0, 1.0]) if taut is None else (1.0 if taut else -1.0)
            segs.append(CableSegmentState(q, w, L + sign * rng.uniform(0.01, 0.05), rng.normal()))
        cables.append(CableState(segs))
    n = params.n
    return PlantState(rng.normal(size=3), rng.normal(size=3), rodrigues(rng.normal(size=3)), rng.normal(size=3),
                      cables, [rodrigues(0.3 * rng.normal(size=3)) for _ in range(n)],
                      [rng.normal(size=3) for _ in range(n)])


def relative_mismatch(a, b) -> float:
    """Worst per-component relative difference, components scaled by max(|b_i|, 1e-6 |b|inf)."""
    a, b = np.asarray(a), np.asarray(b)
    scale = np.maximum(np.abs(b), 1e-6 * max(np.max(np.abs(b)), 1e-300))
    return float(np.max(np.abs(a - b) / scale))


def verify_oracle(samples: int = 50, seed: int = 0) -> Report:
    rng = np.random.default_rng(seed)
    res = {}
    for m in (1, 2):
        worst = 0.0
        for _ in range(samples):
            p = random_system(rng, 1, m)
            s = random_state(rng, p)
            u = ActuatorInput(rng.uniform(0, 10, 1), np.zeros((1, 3)))
            worst = max(worst, relative_mismatch(accelerations(s, p, u), lagrangian_oracle(s, p, u)))
        res[f"max_rel_mismatch_n1_m{m}"] = worst
    return Report("oracle", all(v < ORACLE_TOL for v in res.values()), res)


def spinning_system(damping: float = 0.0, rate: float = 5.0) -> tuple[SystemParams, PlantState]:
    """One quadrotor on a two-segment cable spinning about the system's center of mass.

    Segment stretches balance the centripetal load of a rigid spin; a small
    perturbation excites the cable without letting it go slack.
    """
    body = BodyParams(1.0, np.diag([0.1, 0.12, 0.15]), [[0.1, 0.0, 0.0]])
    quad = QuadParams(0.5, np.diag([0.01, 0.01, 0.02]))
    cab = CableParams.uniform(2, 0.05, 2000.0, damping, 0.5)
    p = SystemParams(body, [quad], [cab])
    m = np.array([quad.mass, *cab.mass])   # quad, mass 1, mass 2 (at the attachment)
    l = cab.rest_length.copy()
    for _ in range(50):
        x = np.array([0.1 + l[0] + l[1], 0.1 + l[1], 0.1])
        xc = float(m @ x) / (body.mass + m.sum())
        T1 = m[0] * rate**2 * (x[0] - xc)
        T2 = T1 + m[1] * rate**2 * (x[1] - xc)
        l = cab.rest_length + np.array([T1, T2]) / cab.stiffness
    w = np.array([0.0, 0.0, rate])
    perturb = [np.array([0.0, 0.3, 0.0]), np.array([0.0, -0.2, 0.0])]
    segs = [CableSegmentState(np.array([-1.0, 0.0, 0.0]), w + dw, float(lj), ld)
            for lj, dw, ld in zip(l, perturb, (0.1, -0.08))]
    s = PlantState(np.zeros(3), np.array([0.0, -rate * xc, 0.0]), np.eye(3), w.copy(),
                   [CableState(segs)], [np.eye(3)], [np.array([0.1, 0.2, 0.3])])
    return p, s


def energy_history(params: SystemParams, state: PlantState, dt: float, duration: float) -> np.ndarray:
    y = state.pack()
    steps = int(round(duration / dt))
    E = np.empty(steps + 1)
    E[0] = sum(total_energy(y, params))
    for k in range(steps):
        y = integrate_step(y, params, None, None, dt)
        E[k + 1] = sum(total_energy(y, params))
        if np.min(y[18 + 6 * params.arrays.N:18 + 7 * params.arrays.N] - params.arrays.L) <= 0:
            raise RuntimeError("a segment went slack; the conservation check needs taut cables")
    return E


def verify_energy(dt: float = 1e-4, duration: float = 1.0) -> Report:
    p, s = spinning_system(0.0)
    E = energy_history(p, s, dt, duration)
    drift = float(np.max(np.abs(E - E[0])) / abs(E[0]))
    pd, sd = spinning_system(2.0)
    Ed = energy_history(pd, sd, dt, duration)
    rise = float(np.max(np.diff(Ed)))
    res = {"relative_drift_undamped": drift, "max_energy_increase_damped_J": max(rise, 0.0),
           "energy_lost_damped_J": float(Ed[0] - Ed[-1])}
    return Report("energy", drift < ENERGY_DRIFT_TOL and rise <= DISSIPATION_TOL and Ed[-1] < Ed[0], res)


FOUR_AGENT_GRAPH = dict(n=4, edges=[(0, 1), (0, 2), (1, 3), (2, 3)], leader_links=np.ones(4))


def reduced_trials(gains: SMCGains, runs: int = 20, seed: int = 0, duration: float = 15.0, dt: float = 2e-4):
    """Random initial errors and bounded sinusoidal disturbances on the 4-agent graph.

    Returns ``(min decreasing fraction outside the boundary layer, worst time to |E|inf < 1e-2)``.
    """
    g = build_graph(**FOUR_AGENT_GRAPH)
    H = np.array([[1.2, -1.6, 0.0], [1.2, 1.6, 0.0], [-1.2, -1.6, 0.0], [-1.2, 1.6, 0.0]])
    spec = FormationSpec.from_leader_offsets(H, g)
    rng = np.random.default_rng(seed)
    k = np.tile(gains.K, 4) if np.size(gains.K) == 3 else np.asarray(gains.K)
    eps = float(np.max(gains.layer(4)))
    frac, t_conv = 1.0, 0.0
    for _ in range(runs):
        r0 = H + rng.uniform(-2, 2, (4, 3))
        v0 = rng.uniform(-1, 1, (4, 3))
        dist = SinusoidalDisturbance.random(k, rng)
        run = simulate_reduced(g, spec, gains, r0, v0, np.zeros(3), disturbance=dist, duration=duration, dt=dt)
        frac = min(frac, run.decreasing_fraction(eps))
        t_conv = max(t_conv, run.first_time_below(run.E_inf, 1e-2))
    return frac, t_conv


TUNED_REDUCED = SMCGains([1.5, 1.5, 1.5], [10.0, 10.0, 10.0], [2.0, 2.0, 2.0])
REFERENCE_REDUCED = SMCGains([0.05, 0.05, 0.0005], [12.0, 12.0, 0.12], [10.0, 10.0, 0.05])


def verify_smc_reduced(gains: SMCGains = TUNED_REDUCED, runs: int = 20, horizon: float = 15.0) -> Report:
    frac, t_conv = reduced_trials(gains, runs)
    res = {"decreasing_fraction": frac, "time_to_E_below_1e-2_s": t_conv}
    return Report("smc-reduced", frac == 1.0 and t_conv <= horizon, res)


def verify_roundtrip(samples: int = 200, seed: int = 0) -> Report:
    rng = np.random.default_rng(seed)
    hat_err = euler_err = extract_err = form_err = 0.0
    g = build_graph(**FOUR_AGENT_GRAPH)
    for _ in range(samples):
        v = rng.normal(size=3)
        hat_err = max(hat_err, float(np.max(np.abs(vee(hat(v)) - v))))
        ang = np.array([rng.uniform(-np.pi, np.pi), rng.uniform(-1.5, 1.5), rng.uniform(-np.pi, np.pi)])
        euler_err = max(euler_err, float(np.max(np.abs(euler_to_rot(*rot_to_euler(euler_to_rot(*ang)))
                                                        - euler_to_rot(*ang)))))
        m = rng.uniform(0.5, 2.0)
        u = np.array([rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 9)])
        sp = thrust_attitude_from_accel(u, m, 9.81)
        extract_err = max(extract_err, float(np.max(np.abs(accel_from_attitude(sp.thrust, sp.phi, sp.theta, m, 9.81)
                                                           - u))))
        H = rng.normal(size=(4, 3))
        spec = FormationSpec.from_leader_offsets(H, g)
        r, v_, rl, vl = rng.normal(size=(4, 3)), rng.normal(size=(4, 3)), rng.normal(size=3), rng.normal(size=3)
        E, _ = formation_errors(r, v_, rl, vl, g, spec)
        brute = np.concatenate([
            sum(g.A[i, j] * (r[i] - r[j] - spec.pair(i, j)) for j in range(4)) + g.B[i] * (r[i] - rl - H[i])
            for i in range(4)])
        form_err = max(form_err, float(np.max(np.abs(E - brute))))
    res = {"hat_vee": hat_err, "euler": euler_err, "thrust_extraction": extract_err, "formation_errors": form_err}
    return Report("roundtrip", all(v < ROUNDTRIP_TOL for v in res.values()), res)


def verify(mode: str) -> Report:
    if mode == "oracle":
        return verify_oracle()
    if mode == "energy":
        return verify_energy()
    if mode == "smc-reduced":
        return verify_smc_reduced()
    if mode == "roundtrip":
        return verify_roundtrip()
    raise ValueError(f"unknown verification mode {mode!r}; expected one of {', '.join(MODES)}")
