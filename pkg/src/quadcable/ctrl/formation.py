"""Desired formation offsets and stacked formation errors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CommGraph

OFFSET_TOL = 1e-9


@dataclass(frozen=True)
class FormationSpec:
    """Desired offsets: ``leader[i]`` is r_i - r_leader, ``pairs[(i, j)]`` is r_i - r_j."""
    leader: np.ndarray                       # (n, 3)
    pairs: dict[tuple[int, int], np.ndarray]

    def __post_init__(self):
        H = np.asarray(self.leader, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "leader", H)
        pairs = {tuple(k): np.asarray(v, dtype=float).reshape(3) for k, v in self.pairs.items()}
        object.__setattr__(self, "pairs", pairs)
        for (i, j), h in pairs.items():
            if (j, i) in pairs and np.max(np.abs(pairs[(j, i)] + h)) > OFFSET_TOL:
                raise ValueError(f"offsets H_{i}{j} and H_{j}{i} are not opposite")
            if np.max(np.abs(h - (H[i] - H[j]))) > OFFSET_TOL:
                raise ValueError(f"offset H_{i}{j} disagrees with the leader offsets (expected H_il - H_jl)")

    @classmethod
    def from_leader_offsets(cls, leader, graph: CommGraph) -> "FormationSpec":
        H = np.asarray(leader, dtype=float).reshape(-1, 3)
        pairs = {(i, j): H[i] - H[j] for i in range(graph.n) for j in range(graph.n) if graph.A[i, j] > 0}
        return cls(H, pairs)

    def pair(self, i: int, j: int) -> np.ndarray:
        if (i, j) in self.pairs:
            return self.pairs[(i, j)]
        if (j, i) in self.pairs:
            return -self.pairs[(j, i)]
        return self.leader[i] - self.leader[j]

    def weighted_offsets(self, graph: CommGraph) -> np.ndarray:
        """Stacked ``sum_j a_ij H_ij + b_i H_il`` (3n), the offset term of the position error."""
        n = graph.n
        h = np.zeros((n, 3))
        for i in range(n):
            for j in range(n):
                if graph.A[i, j] > 0:
                    h[i] += graph.A[i, j] * self.pair(i, j)
            h[i] += graph.B[i] * self.leader[i]
        return h.reshape(-1)


def formation_errors(positions, velocities, r_leader, v_leader, graph: CommGraph, spec: FormationSpec):
    """Stacked position and velocity errors ``(E, E_v)``, agent-major.

    ``E = ((L+B) kron I3) r - sum-of-offsets - (B kron I3)(1 kron r_leader)``,
    which is the per-agent neighbour/leader error summed over the graph.
    """
    n = graph.n
    r = np.asarray(positions, dtype=float).reshape(-1)
    v = np.asarray(velocities, dtype=float).reshape(-1)
    if r.shape != (3 * n,) or v.shape != (3 * n,):
        raise ValueError(f"expected {n} agent positions and velocities")
    rl = np.asarray(r_leader, dtype=float).reshape(3)
    vl = np.asarray(v_leader, dtype=float).reshape(3)
    Q = graph.Q()
    B3 = graph.B3()
    E = Q @ r - spec.weighted_offsets(graph) - B3 @ rl
    Ev = Q @ v - B3 @ vl
    return E, Ev
