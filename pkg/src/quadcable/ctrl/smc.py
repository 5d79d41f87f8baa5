"""Sliding-mode formation control over the communication graph."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CommGraph, GraphError


def _diag3n(x, n, name):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        x = np.diag(x)
    x = np.tile(x, n) if x.shape == (3,) else x
    if x.shape != (3 * n,):
        raise ValueError(f"{name} needs 3 or 3n diagonal entries")
    return x


@dataclass(frozen=True)
class SMCGains:
    """Diagonals of Lambda and M, disturbance bound K and boundary-layer widths (each 3 or 3n entries).

    A scalar boundary layer applies to every axis; zero width means exact switching.
    """
    Lambda: np.ndarray
    M: np.ndarray
    K: np.ndarray
    boundary_layer: float | np.ndarray = 0.0

    def __post_init__(self):
        for name in ("Lambda", "M", "K"):
            v = np.asarray(getattr(self, name), dtype=float)
            v = np.diag(v) if v.ndim == 2 else v
            if np.any(v <= 0) or not np.all(np.isfinite(v)):
                raise ValueError(f"SMC gain {name} must be positive")
            object.__setattr__(self, name, v)
        eps = np.asarray(self.boundary_layer, dtype=float)
        if np.any(~(eps >= 0)) or not np.all(np.isfinite(eps)):
            raise ValueError("boundary_layer must be nonnegative")
        object.__setattr__(self, "boundary_layer", float(eps) if eps.ndim == 0 else eps)

    def expand(self, n: int):
        return (_diag3n(self.Lambda, n, "Lambda"), _diag3n(self.M, n, "M"), _diag3n(self.K, n, "K"))

    def layer(self, n: int) -> np.ndarray:
        """Boundary-layer width per stacked component (3n)."""
        return _diag3n(np.broadcast_to(self.boundary_layer, (3,)) if np.ndim(self.boundary_layer) == 0
                       else self.boundary_layer, n, "boundary_layer")


def sliding_surface(E, Ev, gains: SMCGains) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    lam, _, _ = gains.expand(len(E) // 3)
    return lam * E + np.asarray(Ev, dtype=float)


def switching(S, boundary_layer) -> np.ndarray:
    """``sgn(S)``, or ``sat(S / eps)`` where the boundary layer width ``eps > 0``.

    ``boundary_layer`` is a scalar or one width per component of ``S``.
    """
    S = np.asarray(S, dtype=float)
    eps = np.broadcast_to(np.asarray(boundary_layer, dtype=float), S.shape)
    safe = np.where(eps > 0, eps, 1.0)
    return np.where(eps > 0, np.clip(S / safe, -1.0, 1.0), np.sign(S))


def smc_control(S, v_agents, v_leader, u_leader, graph: CommGraph, gains: SMCGains) -> np.ndarray:
    """Stacked agent acceleration commands ``U`` (3n).

    ``U = -Q^-1 { Lambda (Q v - Bk v_l) - Bk u_l + (Q diag(K) + M) sgn(S) }``
    with ``Q = (L+B) kron I3`` and ``Bk = B kron I3``.
    """
    n = graph.n
    Q = graph.Q()
    B3 = graph.B3()
    lam, mu, k = gains.expand(n)
    v = np.asarray(v_agents, dtype=float).reshape(-1)
    inner = lam * (Q @ v - B3 @ np.asarray(v_leader, dtype=float)) - B3 @ np.asarray(u_leader, dtype=float)
    inner = inner + (Q * k[None, :] + np.diag(mu)) @ switching(S, gains.layer(n))
    try:
        return -np.linalg.solve(Q, inner)
    except np.linalg.LinAlgError as exc:
        raise GraphError("L + B is singular; the graph has no spanning tree") from exc


def lyapunov_monitor(S, S_dot) -> tuple[float, float]:
    """``V' = S^T S / 2`` and its rate ``S^T S_dot``."""
    S = np.asarray(S, dtype=float)
    S_dot = np.asarray(S_dot, dtype=float)
    if S.shape != S_dot.shape:
        raise ValueError("S and S_dot must have the same shape")
    return 0.5 * float(S @ S), float(S @ S_dot)


def surface_rate(S, Delta, graph: CommGraph, gains: SMCGains) -> np.ndarray:
    """Closed-loop ``S_dot = Q Delta - (Q diag(K) + M) sgn(S)`` of the double-integrator model."""
    Q = graph.Q()
    _, mu, k = gains.expand(graph.n)
    return Q @ np.asarray(Delta, dtype=float) - (Q * k[None, :] + np.diag(mu)) @ switching(S, gains.layer(graph.n))


class SMCLaw:
    """:func:`smc_control` and :func:`surface_rate` with the graph matrices factorized once."""

    def __init__(self, graph: CommGraph, gains: SMCGains):
        self.graph = graph
        self.gains = gains
        self.Q = graph.Q()
        self.B3 = graph.B3()
        self.lam, self.mu, self.k = gains.expand(graph.n)
        try:
            self.Qinv = np.linalg.inv(self.Q)
        except np.linalg.LinAlgError as exc:
            raise GraphError("L + B is singular; the graph has no spanning tree") from exc
        self.G = self.Q * self.k[None, :] + np.diag(self.mu)
        self.eps = gains.layer(graph.n)

    def surface(self, E, Ev):
        return self.lam * E + Ev

    def control(self, S, v_agents, v_leader, u_leader):
        inner = self.lam * (self.Q @ v_agents - self.B3 @ v_leader) - self.B3 @ u_leader
        return -self.Qinv @ (inner + self.G @ switching(S, self.eps))

    def surface_rate(self, S, Delta):
        return self.Q @ Delta - self.G @ switching(S, self.eps)
