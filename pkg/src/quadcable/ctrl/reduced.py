"""Closed-loop double-integrator agents under sliding-mode formation control."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .formation import FormationSpec
from .graph import CommGraph
from .smc import SMCGains, SMCLaw


@dataclass
class ReducedRun:
    t: np.ndarray
    V: np.ndarray         # Lyapunov value S^T S / 2
    V_dot: np.ndarray     # S^T S_dot
    S_inf: np.ndarray     # ||S||_inf
    E_inf: np.ndarray     # ||E||_inf

    def decreasing_fraction(self, eps: float) -> float:
        """Fraction of samples with ||S||_inf > eps where V_dot < 0 (1.0 if none)."""
        mask = self.S_inf > eps
        return float(np.mean(self.V_dot[mask] < 0)) if mask.any() else 1.0

    def first_time_below(self, series: np.ndarray, level: float) -> float:
        """First time after which ``series`` stays below ``level`` (inf if never)."""
        above = np.flatnonzero(series >= level)
        if len(above) == 0:
            return float(self.t[0])
        if above[-1] == len(series) - 1:
            return float("inf")
        return float(self.t[above[-1] + 1])


@dataclass(frozen=True)
class SinusoidalDisturbance:
    """``Delta(t) = amp * sin(freq * t + phase)`` per stacked component."""
    amp: np.ndarray
    freq: np.ndarray
    phase: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        return self.amp * np.sin(self.freq * t + self.phase)

    @classmethod
    def random(cls, bound, rng: np.random.Generator, fill: float = 0.9) -> "SinusoidalDisturbance":
        """Random frequencies (0.2 to 2 rad/s) and phases, amplitude ``fill * bound``."""
        bound = np.asarray(bound, dtype=float)
        return cls(fill * bound, rng.uniform(0.2, 2.0, bound.shape), rng.uniform(0, 2 * np.pi, bound.shape))


def sufficient_switching_gain(graph: CommGraph, gains: SMCGains) -> np.ndarray:
    """Per-component margin ``mu_i - 2 sum_j a_ij k_j``.

    When every entry is positive and ``|Delta| <= K``, ``S^T S_dot < 0`` holds
    for every nonzero ``S`` under exact switching.
    """
    _, mu, k = gains.expand(graph.n)
    A3 = np.kron(graph.A, np.eye(3))
    return mu - 2.0 * A3 @ k


@njit(cache=True)
def _loop(Q, Qinv, B3, lam, G, offsets, r, v, rl0, vl, amp, freq, phase, k, eps, dt, steps):
    n3 = r.shape[0]
    V = np.empty(steps + 1)
    Vd = np.empty(steps + 1)
    Si = np.empty(steps + 1)
    Ei = np.empty(steps + 1)
    Bvl = B3 @ vl
    sw = np.empty(n3)
    for s in range(steps + 1):
        t = s * dt
        E = Q @ r - offsets - B3 @ (rl0 + vl * t)
        S = lam * E + Q @ v - Bvl
        D = amp * np.sin(freq * t + phase)
        for a in range(n3):
            if abs(D[a]) > k[a]:
                return V, Vd, Si, Ei, False
            if eps[a] > 0.0:
                sw[a] = min(1.0, max(-1.0, S[a] / eps[a]))
            else:
                sw[a] = np.sign(S[a])
        GS = G @ sw
        Sd = Q @ D - GS
        V[s] = 0.5 * (S @ S)
        Vd[s] = S @ Sd
        Si[s] = np.max(np.abs(S))
        Ei[s] = np.max(np.abs(E))
        if s == steps:
            break
        U = -(Qinv @ (lam * (Q @ v - Bvl) + GS))
        v = v + dt * (U + D)
        r = r + dt * v
    return V, Vd, Si, Ei, True


def simulate_reduced(graph: CommGraph, spec: FormationSpec, gains: SMCGains, r0, v0,
                     leader_pos, leader_vel=None, disturbance: SinusoidalDisturbance | None = None,
                     duration: float = 15.0, dt: float = 2e-4) -> ReducedRun:
    """Integrate ``r_ddot = U + Delta`` with a static or constant-velocity leader (``u_l = 0``).

    Semi-implicit Euler with the control held over each step; ``V_dot`` is
    sampled as ``S^T S_dot`` from the exact closed-loop surface rate.
    """
    n = graph.n
    law = SMCLaw(graph, gains)
    if disturbance is None:
        disturbance = SinusoidalDisturbance(np.zeros(3 * n), np.zeros(3 * n), np.zeros(3 * n))
    steps = int(round(duration / dt))
    vl = np.zeros(3) if leader_vel is None else np.asarray(leader_vel, dtype=float)
    V, Vd, Si, Ei, ok = _loop(law.Q, law.Qinv, law.B3, law.lam, law.G, spec.weighted_offsets(graph),
                              np.array(r0, dtype=float).reshape(-1), np.array(v0, dtype=float).reshape(-1),
                              np.asarray(leader_pos, dtype=float), vl,
                              np.broadcast_to(disturbance.amp, (3 * n,)).astype(float),
                              np.broadcast_to(disturbance.freq, (3 * n,)).astype(float),
                              np.broadcast_to(disturbance.phase, (3 * n,)).astype(float),
                              law.k, law.eps, float(dt), steps)
    if not ok:
        raise ValueError("synthetic disturbance exceeds the bound K")
    return ReducedRun(np.arange(steps + 1) * dt, V, Vd, Si, Ei)
