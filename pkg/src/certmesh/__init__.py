"""Certified topology and epsilon-meshing of algebraic curves and surfaces."""

__version__ = "0.1.0"
