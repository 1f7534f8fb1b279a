"""Simulation and exact computation for the random greedy intersecting-family process."""

__version__ = "0.1.0"
