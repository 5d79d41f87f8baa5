"""Communication graph between agents, with leader links."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


class GraphError(ValueError):
    """Graph is malformed or lacks a spanning tree rooted at the leader."""


@dataclass(frozen=True)
class CommGraph:
    A: np.ndarray  # (n, n) adjacency, zero diagonal
    B: np.ndarray  # (n,) leader link weights

    @property
    def n(self) -> int:
        return len(self.B)

    @property
    def degree(self) -> np.ndarray:
        return np.diag(self.A.sum(axis=1))

    @property
    def laplacian(self) -> np.ndarray:
        return self.degree - self.A

    @property
    def pinned_laplacian(self) -> np.ndarray:
        """``L + diag(B)``."""
        return self.laplacian + np.diag(self.B)

    def Q(self) -> np.ndarray:
        """``(L + B) kron I3``."""
        return np.kron(self.pinned_laplacian, np.eye(3))

    def B3(self) -> np.ndarray:
        """``B kron I3`` as a 3n x 3 map from a leader vector to stacked agent vectors."""
        return np.kron(self.B.reshape(-1, 1), np.eye(3))


def _reachable_from_leader(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Agents reachable from the leader, following information flow j -> i when a_ij > 0."""
    n = len(B)
    seen = B > 0
    todo = deque(np.flatnonzero(seen))
    while todo:
        j = todo.popleft()
        for i in range(n):
            if A[i, j] > 0 and not seen[i]:
                seen[i] = True
                todo.append(i)
    return seen


def build_graph(n: int, edges, leader_links, weights=None, undirected: bool = True) -> CommGraph:
    """Build a :class:`CommGraph` from 0-based edges ``(i, j)``.

    ``leader_links`` is the length-``n`` vector of leader weights ``b_i``.
    With ``undirected`` each edge sets ``a_ij = a_ji``; otherwise ``(i, j)``
    means agent ``i`` listens to agent ``j``.
    """
    if n < 1:
        raise GraphError("need at least one agent")
    A = np.zeros((n, n))
    edges = [tuple(e) for e in edges]
    w = np.ones(len(edges)) if weights is None else np.asarray(weights, dtype=float)
    if len(w) != len(edges):
        raise GraphError("one weight per edge required")
    for (i, j), wij in zip(edges, w):
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) references a missing agent")
        if i == j:
            raise GraphError(f"self-loop on agent {i}")
        if wij <= 0:
            raise GraphError(f"edge ({i}, {j}) needs a positive weight")
        A[i, j] = wij
        if undirected:
            A[j, i] = wij
    B = np.asarray(leader_links, dtype=float).reshape(-1)
    if B.shape != (n,):
        raise GraphError(f"leader_links must have one weight per agent ({n})")
    if np.any(B < 0) or not np.all(np.isfinite(B)):
        raise GraphError("leader link weights must be finite and nonnegative")
    reach = _reachable_from_leader(A, B)
    if not reach.all():
        missing = [int(i) for i in np.flatnonzero(~reach)]
        raise GraphError(f"no spanning tree rooted at the leader: agents {missing} cannot receive leader information")
    return CommGraph(A, B)
