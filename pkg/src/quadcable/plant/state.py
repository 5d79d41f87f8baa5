"""Plant state, inputs and disturbance containers, plus the flat-vector layout.

Flat layout (N segments in total, n quadrotors)::

    [r_l 3 | v_l 3 | R_l 9 | Omega_l 3 | q 3N | omega 3N | l N | l_dot N
     | R_i 9n | Omega_i 3n]

Rotation matrices are stored row-major.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cable import CableSegmentState, CableState
from ..geo3 import is_rotation
from .params import SystemParams


@dataclass
class PlantState:
    r_l: np.ndarray
    v_l: np.ndarray
    R_l: np.ndarray
    Omega_l: np.ndarray
    cables: list[CableState]
    quad_R: list[np.ndarray]
    quad_Omega: list[np.ndarray]

    def check(self, params: SystemParams | None = None) -> None:
        for R in [self.R_l, *self.quad_R]:
            if not is_rotation(R):
                raise ValueError("attitude is not a rotation matrix")
        for c in self.cables:
            for s in c.segments:
                s.check()
        if params is not None:
            if len(self.cables) != params.n or len(self.quad_R) != params.n:
                raise ValueError("state does not match the number of quadrotors")
            for c, cp in zip(self.cables, params.cables):
                if len(c) != cp.segment_count:
                    raise ValueError("state does not match the cable segment counts")

    def pack(self) -> np.ndarray:
        segs = [s for c in self.cables for s in c.segments]
        parts = [self.r_l, self.v_l, np.asarray(self.R_l).reshape(9), self.Omega_l]
        parts += [s.q for s in segs] + [s.omega for s in segs]
        parts += [[s.l for s in segs], [s.l_dot for s in segs]]
        parts += [np.asarray(R).reshape(9) for R in self.quad_R] + list(self.quad_Omega)
        return np.concatenate([np.asarray(p, dtype=float).reshape(-1) for p in parts])

    @classmethod
    def unpack(cls, y, params: SystemParams) -> "PlantState":
        a = params.arrays
        n, N = a.n, a.N
        y = np.asarray(y, dtype=float)
        if y.shape != (a.state_size,):
            raise ValueError(f"state vector must have length {a.state_size}")
        q = y[18:18 + 3 * N].reshape(N, 3)
        w = y[18 + 3 * N:18 + 6 * N].reshape(N, 3)
        l = y[18 + 6 * N:18 + 7 * N]
        ld = y[18 + 7 * N:18 + 8 * N]
        o = 18 + 8 * N
        cables = []
        for i in range(n):
            idx = range(a.start[i], a.start[i + 1])
            cables.append(CableState([CableSegmentState(q[s].copy(), w[s].copy(), float(l[s]), float(ld[s]))
                                      for s in idx]))
        quad_R = [y[o + 9 * i:o + 9 * i + 9].reshape(3, 3).copy() for i in range(n)]
        quad_W = [y[o + 9 * n + 3 * i:o + 9 * n + 3 * i + 3].copy() for i in range(n)]
        return cls(y[0:3].copy(), y[3:6].copy(), y[6:15].reshape(3, 3).copy(), y[15:18].copy(),
                   cables, quad_R, quad_W)


@dataclass
class ActuatorInput:
    thrust: np.ndarray   # (n,) N
    torque: np.ndarray   # (n, 3) N m, body frame

    def __post_init__(self):
        self.thrust = np.asarray(self.thrust, dtype=float).reshape(-1)
        self.torque = np.asarray(self.torque, dtype=float).reshape(-1, 3)
        if np.any(self.thrust < 0):
            raise ValueError("thrust must be nonnegative")

    @classmethod
    def zero(cls, n: int) -> "ActuatorInput":
        return cls(np.zeros(n), np.zeros((n, 3)))


@dataclass
class DisturbanceSet:
    """Additive disturbances. ``quad_force`` are external forces applied at the quadrotors."""
    F_r: np.ndarray = field(default_factory=lambda: np.zeros(3))
    F_eta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    F_q: np.ndarray | None = None       # (N, 3)
    F_l: np.ndarray | None = None       # (N,)
    T: np.ndarray | None = None         # (n, 3)
    quad_force: np.ndarray | None = None  # (n, 3), world frame

    @classmethod
    def zero(cls, params: SystemParams) -> "DisturbanceSet":
        a = params.arrays
        return cls(np.zeros(3), np.zeros(3), np.zeros((a.N, 3)), np.zeros(a.N),
                   np.zeros((a.n, 3)), np.zeros((a.n, 3)))

    def copy(self) -> "DisturbanceSet":
        c = lambda x: None if x is None else np.array(x, dtype=float)
        return DisturbanceSet(c(self.F_r), c(self.F_eta), c(self.F_q), c(self.F_l), c(self.T), c(self.quad_force))

    def kernel_terms(self, params: SystemParams):
        """Return ``(P_delta, quad_force, dT)`` arrays for the kernels."""
        a = params.arrays
        P = np.zeros(a.dim)
        P[0:3] = self.F_r
        P[3:6] = self.F_eta
        if self.F_q is not None:
            P[6:6 + 3 * a.N] = np.asarray(self.F_q, dtype=float).reshape(-1)
        if self.F_l is not None:
            P[6 + 3 * a.N:] = self.F_l
        F = np.zeros((a.n, 3)) if self.quad_force is None else np.asarray(self.quad_force, dtype=float).reshape(a.n, 3)
        T = np.zeros((a.n, 3)) if self.T is None else np.asarray(self.T, dtype=float).reshape(a.n, 3)
        return P, np.ascontiguousarray(F), np.ascontiguousarray(T)
