"""Coupled load / cable / quadrotor dynamics."""
from .dynamics import (NumericalFailure, accelerations, assemble_C, assemble_M, assemble_P,
                       integrate_step, integrate_steps, point_masses, quad_kinematics, quad_position, quad_velocity,
                       regularized_condition, state_derivative, total_energy)
from .oracle import lagrangian_oracle
from .params import BodyParams, QuadParams, SystemParams
from .state import ActuatorInput, DisturbanceSet, PlantState

__all__ = [
    "ActuatorInput", "BodyParams", "DisturbanceSet", "NumericalFailure", "PlantState", "QuadParams",
    "SystemParams", "accelerations", "assemble_C", "assemble_M", "assemble_P", "integrate_step", "integrate_steps",
    "lagrangian_oracle", "point_masses", "quad_kinematics", "quad_position", "quad_velocity",
    "regularized_condition", "state_derivative", "total_energy",
]
