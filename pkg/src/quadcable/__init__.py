"""Simulation and control of quadrotor teams carrying a rigid body on elastic, massy cables."""

__version__ = "0.1.0"
