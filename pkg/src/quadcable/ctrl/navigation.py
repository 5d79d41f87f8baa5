"""Load-leading navigation: the formation leader is built from the load state."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NavigationGains:
    k_r: np.ndarray
    k_i: np.ndarray
    k_v: np.ndarray
    L_t: float  # vertical leader offset from the load (negative: above, since z points down)
    integral_limit: float = np.inf  # per-axis bound on the error integral (m s), anti-windup


    def __post_init__(self):
        for name in ("k_r", "k_i", "k_v"):
            k = np.asarray(getattr(self, name), dtype=float)
            k = np.diag(k) if k.ndim == 1 else k
            if k.shape != (3, 3) or np.any(np.diag(k) <= 0) or np.any(k != np.diag(np.diag(k))):
                raise ValueError(f"{name} must be diagonal with positive entries")
            object.__setattr__(self, name, k)
        if not self.integral_limit > 0:
            raise ValueError("integral_limit must be positive")


@dataclass
class NavState:
    integral: np.ndarray = field(default_factory=lambda: np.zeros(3))
    last_error: np.ndarray | None = None


def leader_ref(load_pos, load_vel, desired_pos, desired_vel, state: NavState, gains: NavigationGains,
               dt: float = 0.0):
    """Return ``(r_leader, v_leader, new_state)``.

    The position-error integral is advanced by ``dt`` with the trapezoidal
    rule before use and clipped to ``gains.integral_limit``; ``dt = 0``
    evaluates without advancing it.
    """
    e = np.asarray(desired_pos, dtype=float) - np.asarray(load_pos, dtype=float)
    prev = e if state.last_error is None else state.last_error
    integral = np.clip(state.integral + 0.5 * dt * (prev + e), -gains.integral_limit, gains.integral_limit)
    r = np.asarray(load_pos, dtype=float) + gains.k_r @ e + gains.k_i @ integral + np.array([0.0, 0.0, gains.L_t])
    v = np.asarray(load_vel, dtype=float) + gains.k_v @ (np.asarray(desired_vel, dtype=float) - load_vel)
    return r, v, NavState(integral, e.copy())
