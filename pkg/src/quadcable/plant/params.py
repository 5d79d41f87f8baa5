"""Physical parameters of the coupled load / cable / quadrotor system."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..cable import CableParams, prefix_masses


def _check_spd(J, name):
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3) or not np.all(np.isfinite(J)):
        raise ValueError(f"{name} must be a finite 3x3 matrix")
    if np.max(np.abs(J - J.T)) > 1e-12:
        raise ValueError(f"{name} must be symmetric")
    if np.min(np.linalg.eigvalsh(J)) <= 0.0:
        raise ValueError(f"{name} must be positive definite")
    return J


@dataclass(frozen=True)
class BodyParams:
    mass: float
    inertia: np.ndarray
    attachments: np.ndarray  # (n, 3), body frame

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("m_l must be positive")
        object.__setattr__(self, "inertia", _check_spd(self.inertia, "J_l"))
        d = np.asarray(self.attachments, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(d)):
            raise ValueError("attachments must be an (n, 3) array")
        object.__setattr__(self, "attachments", d)


@dataclass(frozen=True)
class QuadParams:
    mass: float
    inertia: np.ndarray

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("quad mass must be positive")
        object.__setattr__(self, "inertia", _check_spd(self.inertia, "J_i"))


class KernelArrays:
    """Flat arrays handed to the compiled kernels."""

    def __init__(self, p: "SystemParams"):
        counts = [c.segment_count for c in p.cables]
        self.n = len(counts)
        self.N = int(sum(counts))
        self.start = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self.dvec = np.ascontiguousarray(p.body.attachments)
        self.Mq = np.array(p.M_q, dtype=float).reshape(-1)
        self.Mc = np.concatenate([np.zeros(0)] + p.M_c)
        self.MT = float(p.M_T)
        self.Jl = np.ascontiguousarray(p.body.inertia)
        self.K = np.concatenate([np.zeros(0)] + [c.stiffness for c in p.cables])
        self.b = np.concatenate([np.zeros(0)] + [c.damping for c in p.cables])
        self.L = np.concatenate([np.zeros(0)] + [c.rest_length for c in p.cables])
        self.g = float(p.g)
        self.ml = float(p.body.mass)
        self.mquad = np.array([q.mass for q in p.quads], dtype=float)
        self.mseg = np.concatenate([np.zeros(0)] + [c.mass for c in p.cables])
        self.Jq = np.array([q.inertia for q in p.quads]).reshape(-1, 3, 3)
        self.Jq_inv = np.array([np.linalg.inv(q.inertia) for q in p.quads]).reshape(-1, 3, 3)

    @property
    def dim(self) -> int:
        return 6 + 4 * self.N

    @property
    def state_size(self) -> int:
        return 18 + 8 * self.N + 12 * self.n

    def dyn(self):
        return (self.start, self.dvec, self.Mq, self.Mc, self.MT, self.Jl,
                self.K, self.b, self.L, self.g)


@dataclass(frozen=True)
class SystemParams:
    body: BodyParams
    quads: list[QuadParams]
    cables: list[CableParams]
    g: float = 9.81

    def __post_init__(self):
        n = len(self.quads)
        if len(self.cables) != n or self.body.attachments.shape[0] != n:
            raise ValueError("need one cable and one attachment point per quadrotor")
        if not self.g > 0:
            raise ValueError("g must be positive")

    @property
    def n(self) -> int:
        return len(self.quads)

    @cached_property
    def M_c(self) -> list[np.ndarray]:
        return [prefix_masses(c, q.mass)[0] for c, q in zip(self.cables, self.quads)]

    @cached_property
    def M_q(self) -> np.ndarray:
        return np.array([prefix_masses(c, q.mass)[1] for c, q in zip(self.cables, self.quads)])

    @cached_property
    def M_T(self) -> float:
        return float(self.body.mass + self.M_q.sum())

    @cached_property
    def arrays(self) -> KernelArrays:
        return KernelArrays(self)
