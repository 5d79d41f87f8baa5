"""Scheduled external forces."""
from __future__ import annotations

import numpy as np

from ..plant import DisturbanceSet
from .config import DisturbanceEvent


def inject_disturbance(schedule: list[DisturbanceEvent], t: float, dist: DisturbanceSet) -> DisturbanceSet:
    """Copy of ``dist`` with every event active at ``t`` added to its slot.

    Quadrotor events add to that quadrotor's external force; load events
    add to the force on the load's center of mass.
    """
    out = dist.copy()
    for ev in schedule:
        if not ev.active(t):
            continue
        if ev.target == "load":
            out.F_r = np.asarray(out.F_r, dtype=float) + ev.force
        else:
            if out.quad_force is None:
                raise ValueError("disturbance set has no quadrotor force slot")
            out.quad_force[ev.target] += ev.force
    return out


def active_events(schedule: list[DisturbanceEvent], t: float) -> tuple[int, ...]:
    return tuple(k for k, ev in enumerate(schedule) if ev.active(t))
