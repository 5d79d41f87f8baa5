"""Lumped-parameter cable: point masses joined by parallel spring-dampers.

Segment ``j`` of a cable runs from point mass ``j`` (load side) up to point
mass ``j - 1``; index 0 is the quadrotor itself. Point mass ``n`` (the last
one) sits exactly on the load attachment point. With this ordering the
mass carried "above" segment ``j`` is the quadrotor plus masses
``1 .. j-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geo3 import UNIT_TOL


def gate(x: float) -> float:
    """(1 + sgn x) / 2, with sgn(0) = 0."""
    return 0.5 * (1.0 + np.sign(x))


def axial_force(l: float, l_dot: float, K: float, b: float, L: float) -> float:
    """Tension of one spring-damper; zero whenever the segment is shorter than rest."""
    if l <= 0.0:
        raise ValueError("segment length must be positive")
    dl = l - L
    return (K * dl + b * l_dot) * gate(dl)


def spring_energy(l: float, K: float, L: float) -> float:
    dl = l - L
    return 0.25 * K * dl * (abs(dl) + dl)


@dataclass(frozen=True)
class CableParams:
    mass: np.ndarray       # per segment point mass (kg)
    stiffness: np.ndarray  # N/m
    damping: np.ndarray    # N s/m
    rest_length: np.ndarray  # m

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(a, dtype=float))
                for a in (self.mass, self.stiffness, self.damping, self.rest_length)]
        n = len(arrs[0])
        if n < 1 or any(len(a) != n for a in arrs):
            raise ValueError("cable arrays must be non-empty and equally long")
        m, K, b, L = arrs
        if np.any(m <= 0) or np.any(K <= 0) or np.any(b < 0) or np.any(L <= 0):
            raise ValueError("cable needs mass > 0, stiffness > 0, damping >= 0, rest_length > 0")
        for name, a in zip(("mass", "stiffness", "damping", "rest_length"), arrs):
            object.__setattr__(self, name, a)

    @classmethod
    def uniform(cls, n: int, mass: float, stiffness: float, damping: float, rest_length: float):
        return cls(np.full(n, mass), np.full(n, stiffness), np.full(n, damping), np.full(n, rest_length))

    @property
    def segment_count(self) -> int:
        return len(self.mass)


@dataclass
class CableSegmentState:
    q: np.ndarray          # unit direction, from the upper point mass towards the load
    omega: np.ndarray      # angular velocity of q, orthogonal to q
    l: float
    l_dot: float = 0.0

    def check(self, tol: float = UNIT_TOL) -> None:
        q = np.asarray(self.q, dtype=float)
        if abs(np.linalg.norm(q) - 1.0) > tol:
            raise ValueError("segment direction is not a unit vector")
        if abs(q @ np.asarray(self.omega, dtype=float)) > tol:
            raise ValueError("segment angular velocity must be orthogonal to its direction")
        if self.l <= 0:
            raise ValueError("segment length must be positive")


@dataclass
class CableState:
    segments: list[CableSegmentState] = field(default_factory=list)

    def __len__(self):
        return len(self.segments)

    @classmethod
    def straight(cls, q, lengths, omega=None):
        q = np.asarray(q, dtype=float)
        q = q / np.linalg.norm(q)
        w = np.zeros(3) if omega is None else np.asarray(omega, dtype=float)
        return cls([CableSegmentState(q.copy(), w.copy(), float(l)) for l in lengths])


def prefix_masses(params: CableParams, quad_mass: float) -> tuple[np.ndarray, float]:
    """Return ``(M_c, M_q)``: mass above each segment, and quad plus whole cable."""
    m = params.mass
    Mc = quad_mass + np.concatenate(([0.0], np.cumsum(m)[:-1]))
    return Mc, quad_mass + float(m.sum())


def chain_offsets(state: CableState) -> tuple[np.ndarray, np.ndarray]:
    """Offsets ``sum_{a>j} l_a q_a`` for every point mass ``j`` and the full sum.

    Row ``j-1`` of the first array is the offset of point mass ``j``
    (subtracted from the attachment point); the second value is the
    quadrotor offset.
    """
    n = len(state)
    terms = np.array([s.l * np.asarray(s.q, dtype=float) for s in state.segments]).reshape(n, 3)
    # suffix sums: offset_j = sum over a = j+1 .. n
    suffix = np.cumsum(terms[::-1], axis=0)[::-1]
    per_mass = np.vstack([suffix[1:], np.zeros((1, 3))])
    return per_mass, suffix[0] if n else np.zeros(3)


def chain_offset_rates(state: CableState) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative of :func:`chain_offsets`."""
    n = len(state)
    terms = np.array([s.l_dot * np.asarray(s.q) + s.l * np.cross(s.omega, s.q)
                      for s in state.segments]).reshape(n, 3)
    suffix = np.cumsum(terms[::-1], axis=0)[::-1]
    per_mass = np.vstack([suffix[1:], np.zeros((1, 3))])
    return per_mass, suffix[0] if n else np.zeros(3)
