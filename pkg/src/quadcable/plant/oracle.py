"""Independent Euler-Lagrange reference for small systems.

Works in minimal coordinates around the given state: load position, a
rotation vector for the load attitude, two tangent coordinates per segment
direction and the segment length. Energies are built from explicit point-mass
positions and velocities; every derivative is taken numerically. Intended only
as a cross-check of the assembled equations (it is O(d^2) energy evaluations).
"""
from __future__ import annotations

import numpy as np

from ..cable import gate, spring_energy
from ..geo3 import E3, right_jacobian, rodrigues, tangent_basis
from .params import SystemParams
from .state import ActuatorInput, PlantState

_C4 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_S4 = np.array([-2.0, -1.0, 1.0, 2.0])


def _d4(f, h):
    """4th-order central difference of a scalar-step function ``f(eps)``."""
    return sum(c * f(s * h) for c, s in zip(_C4, _S4)) / h


class _Model:
    def __init__(self, ps: PlantState, params: SystemParams):
        self.p = params
        self.R0 = ps.R_l
        self.q0 = [s.q for c in ps.cables for s in c.segments]
        self.basis = [np.column_stack(tangent_basis(q)) for q in self.q0]
        self.cab = [(i, j) for i, c in enumerate(ps.cables) for j in range(len(c))]
        self.N = len(self.cab)
        self.dim = 6 + 3 * self.N

    def split(self, x):
        N = self.N
        return x[0:3], x[3:6], x[6:6 + 2 * N].reshape(N, 2), x[6 + 2 * N:6 + 3 * N]

    def kinematics(self, x, xd):
        """Positions, velocities and masses of every point mass, plus load attitude and rate."""
        p = self.p
        r, th, phi, l = self.split(x)
        rd, thd, phid, ld = self.split(xd)
        R = self.R0 @ rodrigues(th)
        Om = right_jacobian(th) @ thd
        qs, qds = [], []
        for s in range(self.N):
            B = self.basis[s]
            w = B @ phi[s]
            E = rodrigues(w)
            qs.append(E @ self.q0[s])
            qds.append(E @ np.cross(right_jacobian(w) @ (B @ phid[s]), self.q0[s]))
        pos, vel, mass = [], [], []
        start = 0
        for i, cp in enumerate(p.cables):
            n_i = cp.segment_count
            d = p.body.attachments[i]
            base = r + R @ d
            vbase = rd + R @ np.cross(Om, d)
            # masses j = 0 (quad) .. n_i, each offset by segments j+1 .. n_i
            for j in range(n_i + 1):
                idx = range(start + j, start + n_i)
                pos.append(base - sum((l[s] * qs[s] for s in idx), np.zeros(3)))
                vel.append(vbase - sum((ld[s] * qs[s] + l[s] * qds[s] for s in idx), np.zeros(3)))
                mass.append(p.quads[i].mass if j == 0 else cp.mass[j - 1])
            start += n_i
        return np.array(pos), np.array(vel), np.array(mass), R, Om

    def T(self, x, xd):
        _, vel, mass, _, Om = self.kinematics(x, xd)
        rd = xd[0:3]
        return (0.5 * self.p.body.mass * rd @ rd + 0.5 * Om @ self.p.body.inertia @ Om
                + 0.5 * np.sum(mass * np.sum(vel * vel, axis=1)))

    def V(self, x):
        p = self.p
        pos, _, mass, _, _ = self.kinematics(x, np.zeros(self.dim))
        _, _, _, l = self.split(x)
        V = -p.g * (p.body.mass * x[0:3] @ E3 + np.sum(mass * (pos @ E3)))
        Ks = np.concatenate([c.stiffness for c in p.cables])
        Ls = np.concatenate([c.rest_length for c in p.cables])
        return V + sum(spring_energy(l[s], Ks[s], Ls[s]) for s in range(self.N))

    def quad_positions(self, x):
        pos, _, _, _, _ = self.kinematics(x, np.zeros(self.dim))
        starts = np.concatenate(([0], np.cumsum([c.segment_count + 1 for c in self.p.cables])))
        return pos[starts[:-1]]


def lagrangian_oracle(state: PlantState, params: SystemParams, u: ActuatorInput | None = None,
                      h: float = 1e-3) -> np.ndarray:
    """Accelerations ``[v_l dot, Omega_l dot, omega dot (3 per segment), l ddot]``.

    Same layout as :func:`quadcable.plant.accelerations`. Restricted to at
    most two quadrotors with at most two segments each. The stencil spans
    ``2 h`` in every length, so ``h`` must stay below half of every
    ``|l - L|`` (the spring force has a kink at the slack threshold).
    """
    if params.n > 2 or any(c.segment_count > 2 for c in params.cables):
        raise ValueError("oracle supports at most 2 quadrotors with at most 2 segments")
    state.check(params)
    m = _Model(state, params)
    dim, N = m.dim, m.N
    x0 = np.zeros(dim)
    x0[0:3] = state.r_l
    segs = [s for c in state.cables for s in c.segments]
    x0[6 + 2 * N:] = [s.l for s in segs]
    xd = np.zeros(dim)
    xd[0:3] = state.v_l
    xd[3:6] = state.Omega_l
    for s, seg in enumerate(segs):
        xd[6 + 2 * s:8 + 2 * s] = m.basis[s].T @ seg.omega
    xd[6 + 2 * N:] = [s.l_dot for s in segs]
    I = np.eye(dim)

    def momentum(x, v):
        T0 = m.T(x, v)
        return np.array([m.T(x, v + I[a]) - T0 - m.T(x, I[a]) for a in range(dim)])

    Tunit = np.array([m.T(x0, I[a]) for a in range(dim)])
    M = np.empty((dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            M[a, b] = M[b, a] = m.T(x0, I[a] + I[b]) - Tunit[a] - Tunit[b]
    if np.linalg.cond(M) > 1e12:
        raise np.linalg.LinAlgError("oracle mass matrix is singular")
    Mdot_xd = _d4(lambda e: momentum(x0 + e * xd, xd), h)
    dTdx = np.array([_d4(lambda e: m.T(x0 + e * I[a], xd), h) for a in range(dim)])
    dVdx = np.array([_d4(lambda e: m.V(x0 + e * I[a]), h) for a in range(dim)])
    dFdxd = np.zeros(dim)
    Q = np.zeros(dim)
    start = 0
    for cp in params.cables:
        for j in range(cp.segment_count):
            s = start + j
            dl = x0[6 + 2 * N + s] - cp.rest_length[j]
            dFdxd[6 + 2 * N + s] = cp.damping[j] * xd[6 + 2 * N + s] * gate(dl)
        start += cp.segment_count
    if u is not None:
        forces = np.array([-f * R @ E3 for f, R in zip(u.thrust, state.quad_R)])
        for a in range(dim):
            J = _d4(lambda e: m.quad_positions(x0 + e * I[a]), h)
            Q[a] = np.sum(forces * J)
    xdd = np.linalg.solve(M, Q - Mdot_xd + dTdx - dVdx - dFdxd)
    out = np.zeros(6 + 4 * N)
    out[0:6] = xdd[0:6]
    for s in range(N):
        out[6 + 3 * s:9 + 3 * s] = m.basis[s] @ xdd[6 + 2 * s:8 + 2 * s]
    out[6 + 3 * N:] = xdd[6 + 2 * N:]
    return out
